#pragma once

#include <cstdint>

#include "unravel/grid.hpp"
#include "unravel/operators.hpp"

namespace unravel {

/// Distribution of the scalar noise variable drawn once per time step.
/// Both choices have zero mean and unit variance, which is all the
/// covariance flow depends on at first weak order.
enum class XiDistribution { standard_gaussian, rademacher };

/// Single-channel white-noise model: the noise kernel G together with the
/// derived compensation kernel K = G^dagger G that makes the field norm
/// invariant in the ensemble average. When G is hermitian the noise only
/// rotates the phase of the field and the norm is invariant along every
/// single trajectory; phase_preserving_norm records that case.
struct NoiseModel {
  OperatorMatrix g;
  OperatorMatrix k;  // G^dagger G, computed at construction
  double gamma = 0.0;  // strength when G = gamma * identity, else 0
  XiDistribution xi = XiDistribution::standard_gaussian;
  bool phase_preserving_norm = false;  // G hermitian
  bool scalar_dephasing = false;       // G = gamma * identity (fast path)

  static NoiseModel make(OperatorMatrix g, XiDistribution xi);

  /// G = gamma * identity: pure dephasing.
  static NoiseModel dephasing(const Grid& grid, double gamma, XiDistribution xi);

  /// G = 0: deterministic flow.
  static NoiseModel none(const Grid& grid);

  /// Dense G with independent complex Gaussian entries of the given scale,
  /// reproducible from the seed. Generically non-hermitian.
  static NoiseModel random_general(const Grid& grid, double scale, uint64_t seed,
                                   XiDistribution xi);

  /// Hermitized version of random_general.
  static NoiseModel random_hermitian(const Grid& grid, double scale, uint64_t seed,
                                     XiDistribution xi);

  /// G = S1 + i * skew * S2 for independent random hermitian S1, S2 of the
  /// given scale. Non-hermitian for skew > 0, but with the anti-hermitian
  /// component (which drives the trajectory-norm fluctuations) kept small,
  /// which makes weak-bias measurements of the norm statistically sharp.
  static NoiseModel random_mixed(const Grid& grid, double scale, double skew,
                                 uint64_t seed, XiDistribution xi);
};

}  // namespace unravel
