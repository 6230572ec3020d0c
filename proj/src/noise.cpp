#include "unravel/noise.hpp"

#include <cmath>
#include <random>

namespace unravel {

NoiseModel NoiseModel::make(OperatorMatrix g, XiDistribution xi) {
  if (g.entries.rows() != g.entries.cols()) {
    throw std::invalid_argument("NoiseModel::make: G must be square");
  }
  NoiseModel noise;
  noise.k.entries = g.entries.adjoint() * g.entries;
  noise.k.hermitian = true;
  const double scale = std::max(1.0, g.entries.cwiseAbs().maxCoeff());
  noise.phase_preserving_norm = hermiticity_defect(g.entries) <= 1e-12 * scale;
  g.hermitian = noise.phase_preserving_norm;
  noise.g = std::move(g);
  noise.xi = xi;

  // Detect the G = gamma * identity pattern so steppers can take the
  // scalar-phase fast path.
  const Eigen::Index n = noise.g.entries.rows();
  if (n > 0) {
    const Complex d0 = noise.g.entries(0, 0);
    bool scalar = d0.imag() == 0.0 && d0.real() >= 0.0;
    for (Eigen::Index i = 0; scalar && i < n; ++i) {
      for (Eigen::Index j = 0; scalar && j < n; ++j) {
        const Complex want = (i == j) ? d0 : Complex(0.0, 0.0);
        scalar = noise.g.entries(i, j) == want;
      }
    }
    if (scalar) {
      noise.scalar_dephasing = true;
      noise.gamma = d0.real();
    }
  }
  return noise;
}

NoiseModel NoiseModel::dephasing(const Grid& grid, double gamma, XiDistribution xi) {
  if (gamma < 0.0) {
    throw std::invalid_argument("NoiseModel::dephasing: gamma must be nonnegative");
  }
  OperatorMatrix g;
  g.entries = gamma * Matrix::Identity(grid.n_points, grid.n_points);
  return make(std::move(g), xi);
}

NoiseModel NoiseModel::none(const Grid& grid) {
  OperatorMatrix g;
  g.entries = Matrix::Zero(grid.n_points, grid.n_points);
  return make(std::move(g), XiDistribution::standard_gaussian);
}

namespace {

Matrix random_complex_matrix(int n, double scale, uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = normal(engine);
      const double im = normal(engine);
      m(i, j) = scale * Complex(re, im) / std::sqrt(2.0 * n);
    }
  }
  return m;
}

}  // namespace

NoiseModel NoiseModel::random_general(const Grid& grid, double scale, uint64_t seed,
                                      XiDistribution xi) {
  OperatorMatrix g;
  g.entries = random_complex_matrix(grid.n_points, scale, seed);
  return make(std::move(g), xi);
}

NoiseModel NoiseModel::random_hermitian(const Grid& grid, double scale, uint64_t seed,
                                        XiDistribution xi) {
  const Matrix m = random_complex_matrix(grid.n_points, scale, seed);
  OperatorMatrix g;
  g.entries = 0.5 * (m + m.adjoint());
  return make(std::move(g), xi);
}

NoiseModel NoiseModel::random_mixed(const Grid& grid, double scale, double skew,
                                    uint64_t seed, XiDistribution xi) {
  const Matrix m1 = random_complex_matrix(grid.n_points, scale, seed);
  const Matrix m2 = random_complex_matrix(grid.n_points, scale, seed ^ 0xabcdef12345ULL);
  OperatorMatrix g;
  g.entries = 0.5 * (m1 + m1.adjoint()) +
              Complex(0.0, skew) * 0.5 * (m2 + m2.adjoint());
  return make(std::move(g), xi);
}

}  // namespace unravel
