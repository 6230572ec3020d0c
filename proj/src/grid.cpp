#include "unravel/grid.hpp"

#include <cmath>

namespace unravel {

Grid Grid::make(int n_points, double length) {
  if (n_points < 2) {
    throw std::invalid_argument("Grid::make: n_points must be at least 2, got " +
                                std::to_string(n_points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("Grid::make: length must be positive, got " +
                                std::to_string(length));
  }
  Grid g;
  g.n_points = n_points;
  g.length = length;
  g.spacing = length / n_points;
  g.positions.resize(static_cast<size_t>(n_points));
  for (int j = 0; j < n_points; ++j) {
    g.positions[static_cast<size_t>(j)] = -0.5 * length + j * g.spacing;
  }
  return g;
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (!a.grid.compatible(b.grid)) {
    throw std::invalid_argument("inner_product: grid mismatch");
  }
  return a.grid.spacing * a.amplitudes.dot(b.amplitudes);
}

double norm_value(const StateVector& a) {
  return a.grid.spacing * a.amplitudes.squaredNorm();
}

StateVector normalized(StateVector s) {
  const double n = norm_value(s);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("normalized: state has zero or non-finite norm");
  }
  s.amplitudes /= std::sqrt(n);
  return s;
}

}  // namespace unravel
