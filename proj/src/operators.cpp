#include "unravel/operators.hpp"

#include <cmath>
#include <numbers>

namespace unravel {

namespace {

// Unitary DFT, F_{mj} = exp(-2 pi i m j / n) / sqrt(n).
Matrix dft_matrix(int n) {
  Matrix f(n, n);
  const double w = 2.0 * std::numbers::pi / n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m) {
    for (int j = 0; j < n; ++j) {
      // Reduce the phase index mod n before multiplying to keep the
      // argument small; exp of large arguments loses relative accuracy.
      const long idx = (static_cast<long>(m) * j) % n;
      f(m, j) = scale * std::polar(1.0, -w * static_cast<double>(idx));
    }
  }
  return f;
}

Matrix hermitized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace

OperatorMatrix identity_operator(const Grid& grid) {
  OperatorMatrix op;
  op.entries = Matrix::Identity(grid.n_points, grid.n_points);
  op.hermitian = true;
  return op;
}

OperatorMatrix position_operator(const Grid& grid) {
  OperatorMatrix op;
  op.entries = Matrix::Zero(grid.n_points, grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    op.entries(j, j) = grid.positions[static_cast<size_t>(j)];
  }
  op.hermitian = true;
  return op;
}

std::vector<double> fourier_wavenumbers(const Grid& grid) {
  const int n = grid.n_points;
  std::vector<double> k(static_cast<size_t>(n));
  const double dk = 2.0 * std::numbers::pi / grid.length;
  for (int m = 0; m < n; ++m) {
    const int signed_m = (m <= (n - 1) / 2) ? m : m - n;
    k[static_cast<size_t>(m)] = dk * signed_m;
  }
  return k;
}

OperatorMatrix momentum_operator(const Grid& grid, double mu, DerivativeScheme scheme) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("momentum_operator: mu must be positive");
  }
  const int n = grid.n_points;
  OperatorMatrix op;
  op.hermitian = true;

  if (scheme == DerivativeScheme::central_difference) {
    // -i mu (phi_{j+1} - phi_{j-1}) / (2 dx), periodic wrap.
    op.entries = Matrix::Zero(n, n);
    const Complex c(0.0, -mu / (2.0 * grid.spacing));
    for (int i = 0; i < n; ++i) {
      op.entries(i, (i + 1) % n) += c;
      op.entries(i, (i + n - 1) % n) -= c;
    }
    return op;
  }

  // Spectral: p = F^dagger diag(mu k) F with the Nyquist mode dropped.
  const Matrix f = dft_matrix(n);
  std::vector<double> k = fourier_wavenumbers(grid);
  if (n % 2 == 0) {
    k[static_cast<size_t>(n / 2)] = 0.0;
  }
  Vector diag(n);
  for (int m = 0; m < n; ++m) {
    diag(m) = Complex(mu * k[static_cast<size_t>(m)], 0.0);
  }
  op.entries = hermitized(f.adjoint() * diag.asDiagonal() * f);
  return op;
}

OperatorMatrix kinetic_operator(const Grid& grid, double mu, double mass,
                                DerivativeScheme scheme) {
  if (!(mass > 0.0)) {
    throw std::invalid_argument("kinetic_operator: mass must be positive");
  }
  const OperatorMatrix p = momentum_operator(grid, mu, scheme);
  OperatorMatrix op;
  op.entries = hermitized((p.entries * p.entries) / (2.0 * mass));
  op.hermitian = true;
  return op;
}

OperatorMatrix potential_operator(const Grid& grid, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != grid.n_points) {
    throw std::invalid_argument("potential_operator: potential has " +
                                std::to_string(v.size()) + " samples, grid has " +
                                std::to_string(grid.n_points) + " points");
  }
  OperatorMatrix op;
  op.entries = Matrix::Zero(grid.n_points, grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    op.entries(j, j) = v[static_cast<size_t>(j)];
  }
  op.hermitian = true;
  return op;
}

OperatorMatrix hamiltonian_build(const Grid& grid, double mu, double mass,
                                 const std::vector<double>& potential,
                                 DerivativeScheme scheme) {
  const OperatorMatrix kin = kinetic_operator(grid, mu, mass, scheme);
  const OperatorMatrix pot = potential_operator(grid, potential);
  OperatorMatrix h;
  h.entries = kin.entries + pot.entries;
  h.hermitian = true;
  return h;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("commutator: dimension mismatch");
  }
  OperatorMatrix c;
  c.entries = a.entries * b.entries - b.entries * a.entries;
  c.hermitian = false;
  return c;
}

StateVector apply(const OperatorMatrix& op, const StateVector& s) {
  if (op.dim() != s.size()) {
    throw std::invalid_argument("apply: operator/state dimension mismatch");
  }
  StateVector out;
  out.grid = s.grid;
  out.amplitudes = op.entries * s.amplitudes;
  return out;
}

std::vector<double> harmonic_potential(const Grid& grid, double mass, double omega) {
  std::vector<double> v(static_cast<size_t>(grid.n_points));
  for (int j = 0; j < grid.n_points; ++j) {
    const double x = grid.positions[static_cast<size_t>(j)];
    v[static_cast<size_t>(j)] = 0.5 * mass * omega * omega * x * x;
  }
  return v;
}

double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double spectral_norm_estimate(const Matrix& a, int iterations) {
  if (a.rows() == 0) return 0.0;
  Vector v = Vector::Ones(a.cols());
  v.normalize();
  double norm = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = a.adjoint() * (a * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    norm = std::sqrt(wn);
    v = w / wn;
  }
  return norm;
}

}  // namespace unravel
