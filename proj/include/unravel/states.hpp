#pragma once

#include <utility>

#include "unravel/grid.hpp"
#include "unravel/operators.hpp"

namespace unravel {

/// Normalized Gaussian packet exp(-(x-center)^2/(4 sigma^2) + i k0 x).
/// sigma is the position-space standard deviation. Throws when the packet
/// is unresolvable on the grid (width under 4 points, or tails touching
/// the periodic boundary at more than 1e-8 of the peak).
StateVector gaussian_packet(const Grid& grid, double center, double sigma,
                            double momentum_k = 0.0);

/// Normalized plane wave exp(i k_m x) for integer mode index m.
StateVector plane_wave_state(const Grid& grid, int mode);

/// Eigenvalues (ascending) and eigenvector columns of a hermitian operator.
/// Eigenvector phases are fixed so the largest-magnitude component is real
/// and positive, which makes the decomposition reproducible.
std::pair<RealVector, Matrix> hermitian_eigensystem(const OperatorMatrix& op);

/// Lowest eigenvector of h, normalized under the grid weight.
StateVector ground_state(const Grid& grid, const OperatorMatrix& h);

/// n-th eigenvector of h (0 = ground state), normalized under the grid weight.
StateVector eigenstate(const Grid& grid, const OperatorMatrix& h, int n);

}  // namespace unravel
