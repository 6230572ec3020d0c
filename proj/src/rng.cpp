#include "unravel/rng.hpp"

namespace unravel {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t substream_seed(uint64_t base_seed, uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

}  // namespace unravel
