#pragma once

#include <vector>

#include "unravel/types.hpp"

namespace unravel {

/// Uniform periodic 1-D spatial grid, centered on zero. Carries the
/// quadrature weight `spacing` used by every inner product and trace:
/// integrals over x are Riemann sums with weight dx = length / n_points.
struct Grid {
  int n_points = 0;
  double length = 0.0;
  double spacing = 0.0;
  std::vector<double> positions;  // x_j = -length/2 + j * spacing

  static Grid make(int n_points, double length);

  bool compatible(const Grid& other) const {
    return n_points == other.n_points && length == other.length;
  }
};

/// Complex field sampled on a grid. The dynamical variable of every flow
/// in this library, whether it plays the role of the stochastic field or
/// of a deterministic wave function.
struct StateVector {
  Vector amplitudes;
  Grid grid;

  Eigen::Index size() const { return amplitudes.size(); }
};

/// dx * sum_j conj(a_j) b_j. Throws on grid mismatch.
Complex inner_product(const StateVector& a, const StateVector& b);

/// The norm functional: inner_product(a, a), guaranteed real and >= 0.
double norm_value(const StateVector& a);

/// Rescales so that norm_value(result) == 1. Throws on zero input.
StateVector normalized(StateVector s);

}  // namespace unravel
