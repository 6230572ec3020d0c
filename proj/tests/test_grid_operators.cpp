#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "unravel/grid.hpp"
#include "unravel/operators.hpp"
#include "unravel/states.hpp"

using namespace unravel;

namespace {

StateVector random_state(const Grid& grid, uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateVector s;
  s.grid = grid;
  s.amplitudes.resize(grid.n_points);
  for (int j = 0; j < grid.n_points; ++j) {
    s.amplitudes(j) = Complex(normal(engine), normal(engine));
  }
  return normalized(std::move(s));
}

}  // namespace

TEST_CASE("grid construction basics") {
  const Grid g = Grid::make(4, 4.0);
  CHECK(g.spacing == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.positions[0] == doctest::Approx(-2.0));
  CHECK(g.positions[1] == doctest::Approx(-1.0));
  CHECK(g.positions[2] == doctest::Approx(0.0));
  CHECK(g.positions[3] == doctest::Approx(1.0));

  const Grid g2 = Grid::make(2, 1.0);
  CHECK(g2.spacing == doctest::Approx(0.5));
  CHECK(g2.positions[0] == doctest::Approx(-0.5));
  CHECK(g2.positions[1] == doctest::Approx(0.0));

  const Grid g3 = Grid::make(256, 20.0);
  CHECK(g3.spacing == doctest::Approx(0.078125).epsilon(1e-15));
  CHECK(g3.spacing * g3.n_points == doctest::Approx(g3.length).epsilon(1e-12));

  // Uniform, strictly increasing positions.
  for (int j = 1; j < g3.n_points; ++j) {
    CHECK(g3.positions[j] > g3.positions[j - 1]);
    CHECK(g3.positions[j] - g3.positions[j - 1] ==
          doctest::Approx(g3.spacing).epsilon(1e-12));
  }
}

TEST_CASE("grid construction rejects bad arguments") {
  CHECK_THROWS_AS(Grid::make(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid::make(8, -2.0), std::invalid_argument);
}

TEST_CASE("inner product: normalization, linearity, orthogonal plane waves") {
  const Grid g = Grid::make(64, 8.0);
  const StateVector phi = random_state(g, 1);

  CHECK(inner_product(phi, phi).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inner_product(phi, phi).imag() == doctest::Approx(0.0));

  StateVector iphi = phi;
  iphi.amplitudes *= Complex(0.0, 1.0);
  const Complex ip = inner_product(phi, iphi);
  CHECK(ip.real() == doctest::Approx(0.0));
  CHECK(ip.imag() == doctest::Approx(1.0).epsilon(1e-12));

  // Distinct plane-wave modes are orthogonal: the overlap is a geometric
  // sum over roots of unity, which vanishes identically.
  const StateVector w1 = plane_wave_state(g, 1);
  const StateVector w2 = plane_wave_state(g, 2);
  CHECK(std::abs(inner_product(w1, w2)) <= 1e-12);

  const Grid other = Grid::make(32, 8.0);
  const StateVector psi = random_state(other, 2);
  CHECK_THROWS_AS(inner_product(phi, psi), std::invalid_argument);
}

TEST_CASE("inner product conjugate symmetry on random vectors") {
  const Grid g = Grid::make(48, 6.0);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const StateVector a = random_state(g, 100 + seed);
    const StateVector b = random_state(g, 200 + seed);
    const Complex ab = inner_product(a, b);
    const Complex ba = inner_product(b, a);
    CHECK(std::abs(ab - std::conj(ba)) <= 1e-14);
  }
}

TEST_CASE("spectral momentum acts as mu k on resolved plane waves") {
  const Grid g = Grid::make(64, 8.0);
  const double mu = 1.0;
  const OperatorMatrix p = momentum_operator(g, mu);

  const double k1 = 2.0 * std::numbers::pi / g.length;
  const StateVector w = plane_wave_state(g, 1);
  const StateVector pw = apply(p, w);
  for (int j = 0; j < g.n_points; ++j) {
    CHECK(std::abs(pw.amplitudes(j) - mu * k1 * w.amplitudes(j)) <= 1e-10);
  }

  // Constant function: derivative vanishes.
  const StateVector constant = plane_wave_state(g, 0);
  const StateVector pc = apply(p, constant);
  CHECK(pc.amplitudes.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("spectral momentum is diagonal on every resolved mode") {
  const Grid g = Grid::make(32, 5.0);
  const OperatorMatrix p = momentum_operator(g, 1.0);
  for (int m = -15; m <= 15; ++m) {
    const StateVector w = plane_wave_state(g, m);
    const StateVector pw = apply(p, w);
    const double expected = 2.0 * std::numbers::pi * m / g.length;
    CHECK((pw.amplitudes - expected * w.amplitudes).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("momentum operators are hermitian") {
  const Grid g = Grid::make(64, 20.0);
  CHECK(hermiticity_defect(momentum_operator(g, 1.0).entries) <= 1e-12);
  CHECK(hermiticity_defect(
            momentum_operator(g, 1.0, DerivativeScheme::central_difference).entries) <=
        1e-12);
  CHECK(hermiticity_defect(position_operator(g).entries) <= 1e-12);
  const OperatorMatrix h =
      hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.0));
  CHECK(hermiticity_defect(h.entries) <= 1e-12);
}

TEST_CASE("central difference momentum is second order") {
  // Error against the exact derivative of a smooth packet should shrink
  // by ~4 when the resolution doubles.
  const auto cd_error = [](int n) {
    const Grid g = Grid::make(n, 20.0);
    const StateVector psi = gaussian_packet(g, 0.0, 1.2, 1.0);
    const OperatorMatrix p_cd =
        momentum_operator(g, 1.0, DerivativeScheme::central_difference);
    const OperatorMatrix p_sp = momentum_operator(g, 1.0);
    return (apply(p_cd, psi).amplitudes - apply(p_sp, psi).amplitudes)
        .cwiseAbs()
        .maxCoeff();
  };
  const double e1 = cd_error(128);
  const double e2 = cd_error(256);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("position operator: diagonal action and expectations") {
  const Grid g = Grid::make(256, 20.0);
  const OperatorMatrix x = position_operator(g);

  StateVector delta;
  delta.grid = g;
  delta.amplitudes = Vector::Zero(g.n_points);
  delta.amplitudes(37) = 1.0;
  const StateVector xd = apply(x, delta);
  CHECK(xd.amplitudes(37) == Complex(g.positions[37], 0.0));
  CHECK(xd.amplitudes.cwiseAbs().sum() == doctest::Approx(std::abs(g.positions[37])));

  const StateVector even = gaussian_packet(g, 0.0, 1.0);
  CHECK(std::abs(inner_product(even, apply(x, even))) <= 1e-10);

  // Continuum expectation of x over a normalized Gaussian centered at 1.5
  // is exactly the center.
  const StateVector shifted = gaussian_packet(g, 1.5, 1.0);
  CHECK(inner_product(shifted, apply(x, shifted)).real() ==
        doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("harmonic hamiltonian reproduces the oscillator spectrum") {
  const Grid g = Grid::make(256, 20.0);
  const OperatorMatrix h =
      hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.0));
  const auto [vals, vecs] = hermitian_eigensystem(h);
  // mu omega (n + 1/2) with mu = omega = 1.
  CHECK(vals(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(vals(1) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(vals(2) == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("free hamiltonian has a zero mode") {
  const Grid g = Grid::make(64, 10.0);
  const OperatorMatrix h = hamiltonian_build(
      g, 1.0, 1.0, std::vector<double>(static_cast<size_t>(g.n_points), 0.0));
  const auto [vals, vecs] = hermitian_eigensystem(h);
  CHECK(std::abs(vals(0)) <= 1e-10);
}

TEST_CASE("hamiltonian_build rejects a mis-sized potential") {
  const Grid g = Grid::make(64, 10.0);
  CHECK_THROWS_AS(hamiltonian_build(g, 1.0, 1.0, std::vector<double>(63, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("hamiltonian spectrum is real") {
  const Grid g = Grid::make(64, 20.0);
  const OperatorMatrix h =
      hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.0));
  // Route through the general (non-self-adjoint) solver so reality is a
  // measured property rather than a solver guarantee.
  Eigen::ComplexEigenSolver<Matrix> solver(h.entries);
  REQUIRE(solver.info() == Eigen::Success);
  CHECK(solver.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("commutators: self, canonical pair, kinetic identity") {
  const Grid g = Grid::make(256, 20.0);
  const OperatorMatrix x = position_operator(g);
  const OperatorMatrix p = momentum_operator(g, 1.0);

  CHECK(commutator(x, x).entries.cwiseAbs().maxCoeff() == 0.0);

  // [x, p] acting on a well-resolved packet returns i mu times the packet,
  // pointwise wherever the packet has appreciable weight.
  const StateVector psi = gaussian_packet(g, 0.0, 1.0);
  const StateVector c = apply(commutator(x, p), psi);
  const double peak = psi.amplitudes.cwiseAbs().maxCoeff();
  for (int j = 0; j < g.n_points; ++j) {
    if (std::abs(psi.amplitudes(j)) > 1e-3 * peak) {
      const Complex expected = Complex(0.0, 1.0) * psi.amplitudes(j);
      CHECK(std::abs(c.amplitudes(j) - expected) <=
            1e-6 * std::abs(psi.amplitudes(j)));
    }
  }

  // [x, p^2/2m] = i mu p / m on resolved states.
  const double mass = 1.0;
  const OperatorMatrix kin = kinetic_operator(g, 1.0, mass);
  const StateVector lhs = apply(commutator(x, kin), psi);
  StateVector rhs = apply(p, psi);
  rhs.amplitudes *= Complex(0.0, 1.0) / mass;
  CHECK((lhs.amplitudes - rhs.amplitudes).cwiseAbs().maxCoeff() <= 1e-6);

  const Grid small = Grid::make(8, 2.0);
  CHECK_THROWS_AS(commutator(x, position_operator(small)), std::invalid_argument);
}

TEST_CASE("spectral norm estimate matches the eigenvalue range") {
  const Grid g = Grid::make(64, 20.0);
  const OperatorMatrix h =
      hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.0));
  const auto [vals, vecs] = hermitian_eigensystem(h);
  const double expected = std::max(std::abs(vals(0)), std::abs(vals(vals.size() - 1)));
  CHECK(spectral_norm_estimate(h.entries) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("gaussian packet rejects unresolvable parameters") {
  const Grid g = Grid::make(64, 20.0);
  CHECK_THROWS_AS(gaussian_packet(g, 0.0, 0.5 * g.spacing), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_packet(g, 9.5, 1.0), std::invalid_argument);
}
