#pragma once

#include <cstdint>
#include <vector>

#include "unravel/grid.hpp"
#include "unravel/types.hpp"

namespace unravel {

enum class DerivativeScheme { spectral, central_difference };

/// Dense matrix acting on state vectors by plain matrix-vector product.
///
/// Convention: entries = dx * A(x_i, x_j) for a continuum kernel A, so that
/// (entries * phi)_i approximates the integral of A(x_i, x') phi(x') dx'.
/// With this choice the Dirac delta maps to the identity matrix and operator
/// composition is ordinary matrix multiplication, with no stray dx factors.
struct OperatorMatrix {
  Matrix entries;
  bool hermitian = false;

  Eigen::Index dim() const { return entries.rows(); }
};

OperatorMatrix identity_operator(const Grid& grid);

/// Diagonal matrix of grid positions x_j.
OperatorMatrix position_operator(const Grid& grid);

/// -i mu d/dx on the periodic domain. The spectral scheme diagonalizes in
/// the discrete Fourier basis and is exact on resolved plane waves; the
/// Nyquist mode (even n) is assigned derivative zero. Central differences
/// are second order and provided for convergence comparisons.
OperatorMatrix momentum_operator(const Grid& grid, double mu,
                                 DerivativeScheme scheme = DerivativeScheme::spectral);

/// p^2 / (2 mass), built from the momentum matrix of the same scheme.
OperatorMatrix kinetic_operator(const Grid& grid, double mu, double mass,
                                DerivativeScheme scheme = DerivativeScheme::spectral);

/// Diagonal matrix of sampled potential values. Throws on length mismatch.
OperatorMatrix potential_operator(const Grid& grid, const std::vector<double>& v);

/// H = p^2/(2 mass) + diag(V).
OperatorMatrix hamiltonian_build(const Grid& grid, double mu, double mass,
                                 const std::vector<double>& potential,
                                 DerivativeScheme scheme = DerivativeScheme::spectral);

/// AB - BA. Throws on dimension mismatch.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

StateVector apply(const OperatorMatrix& op, const StateVector& s);

/// V(x) = 0.5 * mass * omega^2 * x^2 sampled on the grid.
std::vector<double> harmonic_potential(const Grid& grid, double mass, double omega);

/// Signed wavenumbers k_m = 2 pi m~ / L in FFT ordering (m~ in [-n/2, n/2)).
std::vector<double> fourier_wavenumbers(const Grid& grid);

/// max_ij |A_ij - conj(A_ji)|
double hermiticity_defect(const Matrix& a);

/// Power-iteration estimate of the largest singular value.
double spectral_norm_estimate(const Matrix& a, int iterations = 50);

}  // namespace unravel
