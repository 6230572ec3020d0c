#include "unravel/density.hpp"

#include <cmath>

#include "unravel/states.hpp"

namespace unravel {

DensityMatrix pure_state_density(const StateVector& psi) {
  const double n = norm_value(psi);
  if (std::abs(n - 1.0) > 1e-8) {
    throw std::invalid_argument("pure_state_density: state has norm " +
                                std::to_string(n) + ", expected 1");
  }
  DensityMatrix rho;
  rho.grid = psi.grid;
  rho.entries = psi.amplitudes * psi.amplitudes.adjoint();
  return rho;
}

double density_trace(const DensityMatrix& rho) {
  return rho.grid.spacing * rho.entries.trace().real();
}

double purity(const DensityMatrix& rho) {
  const double dx = rho.grid.spacing;
  // Tr(rho^2) = sum_ij rho_ij rho_ji, with one grid weight per trace and
  // one per operator composition.
  const Complex s = rho.entries.cwiseProduct(rho.entries.transpose()).sum();
  return dx * dx * s.real();
}

double smallest_eigenvalue(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho.entries + rho.entries.adjoint()));
  return rho.grid.spacing * solver.eigenvalues().minCoeff();
}

DensityMatrix liouville_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                            double mu) {
  if (rho.dim() != h.dim()) {
    throw std::invalid_argument("liouville_rhs: dimension mismatch");
  }
  DensityMatrix rate;
  rate.grid = rho.grid;
  rate.entries = (h.entries * rho.entries - rho.entries * h.entries) / Complex(0.0, mu);
  return rate;
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                           const NoiseModel& noise, double mu) {
  if (rho.dim() != h.dim() || rho.dim() != noise.g.dim()) {
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  }
  DensityMatrix rate = liouville_rhs(rho, h, mu);
  rate.entries += noise.g.entries * rho.entries * noise.g.entries.adjoint();
  rate.entries -= 0.5 * (noise.k.entries * rho.entries + rho.entries * noise.k.entries);
  return rate;
}

Matrix unitary_propagator(const OperatorMatrix& h, double mu, double tau) {
  auto [vals, vecs] = hermitian_eigensystem(h);
  Vector phases(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    phases(i) = std::polar(1.0, -tau * vals(i) / mu);
  }
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

namespace {

void check_finite(const Matrix& m, long step) {
  if (!m.allFinite()) {
    throw NumericalError("integrate_density: non-finite entries at step " +
                             std::to_string(step),
                         step);
  }
}

}  // namespace

DensitySeries integrate_density(const DensityMatrix& rho0, DensityFlow flow,
                                const OperatorMatrix& h, const NoiseModel* noise,
                                double mu, double tau, long n_steps,
                                DensityMethod method, long stride) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("integrate_density: tau must be positive");
  }
  if (stride < 1) {
    throw std::invalid_argument("integrate_density: stride must be >= 1");
  }
  if (flow == DensityFlow::lindblad && noise == nullptr) {
    throw std::invalid_argument("integrate_density: lindblad flow requires a noise model");
  }
  if (flow == DensityFlow::lindblad && method == DensityMethod::exact_unitary_conjugation) {
    throw std::invalid_argument(
        "integrate_density: exact conjugation applies only to the liouville flow");
  }

  DensitySeries series;
  series.times.push_back(0.0);
  series.states.push_back(rho0);

  Matrix rho = rho0.entries;
  const auto record = [&](long step) {
    series.times.push_back(step * tau);
    DensityMatrix snap;
    snap.grid = rho0.grid;
    snap.entries = rho;
    series.states.push_back(std::move(snap));
  };

  if (method == DensityMethod::exact_unitary_conjugation) {
    const Matrix u = unitary_propagator(h, mu, tau);
    for (long s = 1; s <= n_steps; ++s) {
      rho = u * rho * u.adjoint();
      check_finite(rho, s);
      if (s % stride == 0 || s == n_steps) record(s);
    }
    return series;
  }

  const Matrix& hm = h.entries;
  const Complex inv_imu = 1.0 / Complex(0.0, mu);
  const auto rhs = [&](const Matrix& r) -> Matrix {
    Matrix rate = (hm * r - r * hm) * inv_imu;
    if (flow == DensityFlow::lindblad) {
      rate += noise->g.entries * r * noise->g.entries.adjoint();
      rate -= 0.5 * (noise->k.entries * r + r * noise->k.entries);
    }
    return rate;
  };

  for (long s = 1; s <= n_steps; ++s) {
    const Matrix k1 = rhs(rho);
    const Matrix k2 = rhs(rho + 0.5 * tau * k1);
    const Matrix k3 = rhs(rho + 0.5 * tau * k2);
    const Matrix k4 = rhs(rho + tau * k3);
    rho += (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint());
    check_finite(rho, s);
    if (s % stride == 0 || s == n_steps) record(s);
  }
  return series;
}

StateSeries schrodinger_propagate(const StateVector& psi0, const OperatorMatrix& h,
                                  double mu, double tau, long n_steps,
                                  WaveMethod method, long stride) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("schrodinger_propagate: tau must be positive");
  }
  if (stride < 1) {
    throw std::invalid_argument("schrodinger_propagate: stride must be >= 1");
  }
  const double n0 = norm_value(psi0);
  if (std::abs(n0 - 1.0) > 1e-8) {
    throw std::invalid_argument("schrodinger_propagate: initial state has norm " +
                                std::to_string(n0) + ", expected 1");
  }

  StateSeries series;
  series.times.push_back(0.0);
  series.states.push_back(psi0);

  Vector psi = psi0.amplitudes;
  const auto record = [&](long step) {
    series.times.push_back(step * tau);
    StateVector snap;
    snap.grid = psi0.grid;
    snap.amplitudes = psi;
    series.states.push_back(std::move(snap));
  };

  if (method == WaveMethod::eigendecomposition) {
    const Matrix u = unitary_propagator(h, mu, tau);
    for (long s = 1; s <= n_steps; ++s) {
      psi = u * psi;
      if (!psi.allFinite()) {
        throw NumericalError("schrodinger_propagate: non-finite amplitudes at step " +
                                 std::to_string(s),
                             s);
      }
      if (s % stride == 0 || s == n_steps) record(s);
    }
    return series;
  }

  // Crank-Nicolson / Cayley: (I + i tau H / 2 mu) psi' = (I - i tau H / 2 mu) psi
  const Eigen::Index n = h.dim();
  const Matrix iht = Complex(0.0, tau / (2.0 * mu)) * h.entries;
  const Matrix lhs = Matrix::Identity(n, n) + iht;
  const Matrix rhs = Matrix::Identity(n, n) - iht;
  const Eigen::PartialPivLU<Matrix> lu(lhs);
  for (long s = 1; s <= n_steps; ++s) {
    psi = lu.solve(rhs * psi);
    if (!psi.allFinite()) {
      throw NumericalError("schrodinger_propagate: non-finite amplitudes at step " +
                               std::to_string(s),
                           s);
    }
    if (s % stride == 0 || s == n_steps) record(s);
  }
  return series;
}

ConsistencyReport consistency_check_pure(const DensitySeries& rho_series,
                                         const StateSeries& psi_series) {
  if (rho_series.times.size() != psi_series.times.size()) {
    throw std::invalid_argument("consistency_check_pure: series lengths differ");
  }
  ConsistencyReport report;
  for (size_t i = 0; i < rho_series.times.size(); ++i) {
    if (std::abs(rho_series.times[i] - psi_series.times[i]) > 1e-9) {
      throw std::invalid_argument("consistency_check_pure: time stamp mismatch at index " +
                                  std::to_string(i));
    }
    const Vector& psi = psi_series.states[i].amplitudes;
    const double dev =
        (rho_series.states[i].entries - psi * psi.adjoint()).cwiseAbs().maxCoeff();
    report.times.push_back(rho_series.times[i]);
    report.deviations.push_back(dev);
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  return report;
}

}  // namespace unravel
