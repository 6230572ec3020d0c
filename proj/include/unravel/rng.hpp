#pragma once

#include <cstdint>
#include <random>

#include "unravel/noise.hpp"

namespace unravel {

/// SplitMix64 finalizer; good avalanche for seed derivation.
uint64_t splitmix64(uint64_t x);

/// Seed for the substream of trajectory `index` under `base_seed`. The rule
/// is a fixed function of (base_seed, index), so parallel and serial runs
/// assign identical streams.
uint64_t substream_seed(uint64_t base_seed, uint64_t index);

/// Draws the per-step scalar noise variable: zero mean, unit variance.
class XiSampler {
 public:
  XiSampler(uint64_t seed, XiDistribution dist)
      : engine_(seed), dist_(dist), seed_(seed) {}

  double draw() {
    if (dist_ == XiDistribution::rademacher) {
      return (engine_() & 1u) ? 1.0 : -1.0;
    }
    return normal_(engine_);
  }

  uint64_t seed() const { return seed_; }
  XiDistribution distribution() const { return dist_; }

 private:
  std::mt19937_64 engine_;
  XiDistribution dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  uint64_t seed_ = 0;
};

}  // namespace unravel
