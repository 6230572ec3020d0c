#include "unravel/states.hpp"

#include <cmath>
#include <numbers>

namespace unravel {

StateVector gaussian_packet(const Grid& grid, double center, double sigma,
                            double momentum_k) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian_packet: sigma must be positive");
  }
  // Resolvability: the central +/- 2 sigma bulk must span at least 4 points.
  if (sigma < 2.0 * grid.spacing) {
    throw std::invalid_argument("gaussian_packet: width " + std::to_string(sigma) +
                                " spans fewer than 4 grid points (spacing " +
                                std::to_string(grid.spacing) + ")");
  }
  const double half = 0.5 * grid.length;
  const double edge = std::min(std::abs(center - (-half)), std::abs(half - center));
  // Envelope at the nearest boundary relative to the peak.
  const double boundary_amp = std::exp(-edge * edge / (4.0 * sigma * sigma));
  if (edge <= 0.0 || boundary_amp > 1e-6) {
    throw std::invalid_argument(
        "gaussian_packet: tails reach the periodic boundary (relative amplitude " +
        std::to_string(boundary_amp) + ")");
  }

  StateVector s;
  s.grid = grid;
  s.amplitudes.resize(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    const double x = grid.positions[static_cast<size_t>(j)];
    const double d = x - center;
    const double envelope = std::exp(-d * d / (4.0 * sigma * sigma));
    s.amplitudes(j) = envelope * std::polar(1.0, momentum_k * x);
  }
  return normalized(std::move(s));
}

StateVector plane_wave_state(const Grid& grid, int mode) {
  StateVector s;
  s.grid = grid;
  s.amplitudes.resize(grid.n_points);
  const double k = 2.0 * std::numbers::pi * mode / grid.length;
  const double scale = 1.0 / std::sqrt(grid.length);
  for (int j = 0; j < grid.n_points; ++j) {
    s.amplitudes(j) = scale * std::polar(1.0, k * grid.positions[static_cast<size_t>(j)]);
  }
  return s;
}

std::pair<RealVector, Matrix> hermitian_eigensystem(const OperatorMatrix& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.entries);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eigensystem: eigendecomposition failed");
  }
  Matrix vecs = solver.eigenvectors();
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    Eigen::Index imax = 0;
    vecs.col(c).cwiseAbs().maxCoeff(&imax);
    const Complex pivot = vecs(imax, c);
    const double mag = std::abs(pivot);
    if (mag > 0.0) {
      vecs.col(c) *= std::conj(pivot) / mag;
    }
  }
  return {solver.eigenvalues(), std::move(vecs)};
}

StateVector eigenstate(const Grid& grid, const OperatorMatrix& h, int n) {
  if (h.dim() != grid.n_points) {
    throw std::invalid_argument("eigenstate: operator/grid dimension mismatch");
  }
  if (n < 0 || n >= grid.n_points) {
    throw std::invalid_argument("eigenstate: index out of range");
  }
  auto [vals, vecs] = hermitian_eigensystem(h);
  StateVector s;
  s.grid = grid;
  s.amplitudes = vecs.col(n) / std::sqrt(grid.spacing);
  return s;
}

StateVector ground_state(const Grid& grid, const OperatorMatrix& h) {
  return eigenstate(grid, h, 0);
}

}  // namespace unravel
