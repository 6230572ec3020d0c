#pragma once

#include <string>
#include <vector>

#include "unravel/density.hpp"
#include "unravel/grid.hpp"
#include "unravel/operators.hpp"

namespace unravel {

/// Observable of the form integral of conj(phi) A phi, the only functional
/// class used by any flow in this library. Evaluation is real whenever the
/// kernel is hermitian.
struct BilinearFunctional {
  OperatorMatrix kernel;
  std::string label;
};

Complex evaluate(const BilinearFunctional& f, const StateVector& state);

/// The bracket of two bilinear functionals is again bilinear, with kernel
/// equal to the commutator of the kernels.
BilinearFunctional poisson_bracket(const BilinearFunctional& a,
                                   const BilinearFunctional& b);

/// Real canonical coordinates related to the complex field by
/// phi = alpha q + i beta p, with alpha * beta = 1 / (2 mu).
struct CanonicalPair {
  std::vector<double> q;
  std::vector<double> p;
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
};

CanonicalPair make_canonical_pair(std::vector<double> q, std::vector<double> p,
                                  double alpha, double beta, double mu);

StateVector phi_from_qp(const CanonicalPair& pair, const Grid& grid);

CanonicalPair qp_from_phi(const StateVector& state, double alpha, double beta);

/// Trace of kernel * rho under the grid weight: dx * Tr(A rho).
Complex expectation_from_covariance(const BilinearFunctional& f,
                                    const DensityMatrix& rho);

}  // namespace unravel
