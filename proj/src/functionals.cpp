#include "unravel/functionals.hpp"

#include <cmath>

namespace unravel {

Complex evaluate(const BilinearFunctional& f, const StateVector& state) {
  if (f.kernel.dim() != state.size()) {
    throw std::invalid_argument("evaluate: kernel/state dimension mismatch");
  }
  return state.grid.spacing *
         state.amplitudes.dot(f.kernel.entries * state.amplitudes);
}

BilinearFunctional poisson_bracket(const BilinearFunctional& a,
                                   const BilinearFunctional& b) {
  BilinearFunctional out;
  out.kernel = commutator(a.kernel, b.kernel);
  out.label = "{" + a.label + "," + b.label + "}";
  return out;
}

CanonicalPair make_canonical_pair(std::vector<double> q, std::vector<double> p,
                                  double alpha, double beta, double mu) {
  if (q.size() != p.size()) {
    throw std::invalid_argument("make_canonical_pair: q and p lengths differ");
  }
  if (!(mu > 0.0)) {
    throw std::invalid_argument("make_canonical_pair: mu must be positive");
  }
  const double product = alpha * beta;
  const double target = 1.0 / (2.0 * mu);
  if (std::abs(product - target) > 1e-12 * std::abs(target)) {
    throw std::invalid_argument(
        "make_canonical_pair: alpha * beta = " + std::to_string(product) +
        " violates the constraint 1/(2 mu) = " + std::to_string(target));
  }
  CanonicalPair pair;
  pair.q = std::move(q);
  pair.p = std::move(p);
  pair.alpha = alpha;
  pair.beta = beta;
  pair.mu = mu;
  return pair;
}

StateVector phi_from_qp(const CanonicalPair& pair, const Grid& grid) {
  if (static_cast<int>(pair.q.size()) != grid.n_points) {
    throw std::invalid_argument("phi_from_qp: pair/grid dimension mismatch");
  }
  StateVector s;
  s.grid = grid;
  s.amplitudes.resize(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    const auto uj = static_cast<size_t>(j);
    s.amplitudes(j) = Complex(pair.alpha * pair.q[uj], pair.beta * pair.p[uj]);
  }
  return s;
}

CanonicalPair qp_from_phi(const StateVector& state, double alpha, double beta) {
  if (alpha == 0.0 || beta == 0.0) {
    throw std::invalid_argument("qp_from_phi: alpha and beta must be nonzero");
  }
  CanonicalPair pair;
  pair.alpha = alpha;
  pair.beta = beta;
  pair.mu = 1.0 / (2.0 * alpha * beta);
  const auto n = static_cast<size_t>(state.size());
  pair.q.resize(n);
  pair.p.resize(n);
  for (size_t j = 0; j < n; ++j) {
    const Complex amp = state.amplitudes(static_cast<Eigen::Index>(j));
    pair.q[j] = amp.real() / alpha;
    pair.p[j] = amp.imag() / beta;
  }
  return pair;
}

Complex expectation_from_covariance(const BilinearFunctional& f,
                                    const DensityMatrix& rho) {
  if (f.kernel.dim() != rho.entries.rows()) {
    throw std::invalid_argument(
        "expectation_from_covariance: kernel/density dimension mismatch");
  }
  // dx * Tr(A rho) = dx * sum_ij A_ij rho_ji
  return rho.grid.spacing *
         f.kernel.entries.cwiseProduct(rho.entries.transpose()).sum();
}

}  // namespace unravel
