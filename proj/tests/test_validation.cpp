#include <doctest.h>

#include <cmath>

#include "unravel/functionals.hpp"
#include "unravel/states.hpp"
#include "unravel/stochastic.hpp"
#include "unravel/validation.hpp"

using namespace unravel;

namespace {

OperatorMatrix harmonic_h(const Grid& g) {
  return hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.0));
}

std::vector<BilinearFunctional> standard_observables(const Grid& g,
                                                     const OperatorMatrix& h) {
  return {{position_operator(g), "x"},
          {momentum_operator(g, 1.0), "p"},
          {h, "H"}};
}

}  // namespace

TEST_CASE("comparison report: standard errors are sample std over sqrt(M)") {
  // Synthetic per-trajectory data pushed through the accumulator: values
  // 1, 2, 3, 4 have mean 2.5 and sample std sqrt(5/3).
  const Grid g = Grid::make(2, 2.0);
  EnsembleAccumulator acc;
  acc.init(g, 1);
  const std::vector<Matrix> kernels{Matrix::Identity(2, 2)};
  for (double value : {1.0, 2.0, 3.0, 4.0}) {
    Vector phi(2);
    phi << Complex(std::sqrt(value), 0.0), Complex(0.0, 0.0);
    acc.add(phi, kernels);
  }
  CHECK(acc.observable_mean(0) == doctest::Approx(2.5).epsilon(1e-12));
  const double expected_se = std::sqrt(5.0 / 3.0) / 2.0;
  CHECK(acc.observable_std_error(0) == doctest::Approx(expected_se).epsilon(1e-12));

  // Quadrupling the sample count with the same spread halves the error
  // (up to the m-1 correction, negligible at these sizes).
  const auto se_for_reps = [&](int reps) {
    EnsembleAccumulator many;
    many.init(g, 1);
    for (int rep = 0; rep < reps; ++rep) {
      for (double value : {1.0, 2.0, 3.0, 4.0}) {
        Vector phi(2);
        phi << Complex(std::sqrt(value), 0.0), Complex(0.0, 0.0);
        many.add(phi, kernels);
      }
    }
    return many.observable_std_error(0);
  };
  const double ratio = se_for_reps(25) / se_for_reps(100);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("zero-noise ensemble matches the liouville flow to the floor") {
  const Grid g = Grid::make(48, 16.0);
  const OperatorMatrix h = harmonic_h(g);
  const StateVector phi = gaussian_packet(g, 1.0, 0.8);
  const auto observables = standard_observables(g, h);

  EnsembleOptions options;
  options.tau = 1e-2;
  options.n_steps = 100;
  options.m_trajectories = 8;
  options.scheme = StepScheme::exact_split;
  options.base_seed = 11;
  options.stride = 25;
  const EnsembleSeries ensemble =
      run_ensemble(phi, h, NoiseModel::none(g), options, observables);

  const DensitySeries reference = integrate_density(
      pure_state_density(phi), DensityFlow::liouville, h, nullptr, 1.0, 1e-2, 100,
      DensityMethod::exact_unitary_conjugation, 25);

  const auto reports = compare_ensemble_vs_density(ensemble, reference, observables);
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) {
    CHECK(r.passed);
    for (const auto& row : r.rows) {
      CHECK(std::abs(row.ensemble_value - row.reference_value) <= 1e-10);
    }
  }
}

TEST_CASE("dephasing ensemble matches lindblad flow within three sigma") {
  const Grid g = Grid::make(48, 16.0);
  const OperatorMatrix h = harmonic_h(g);
  const StateVector phi = gaussian_packet(g, 1.0, 0.8);
  const auto observables = standard_observables(g, h);
  const NoiseModel noise = NoiseModel::dephasing(g, 0.5, XiDistribution::standard_gaussian);

  EnsembleOptions options;
  options.tau = 1e-2;
  options.n_steps = 200;
  options.m_trajectories = 2000;
  options.scheme = StepScheme::exact_split;
  options.base_seed = 1299;
  options.stride = 50;
  const EnsembleSeries ensemble = run_ensemble(phi, h, noise, options, observables);

  const DensitySeries reference =
      integrate_density(pure_state_density(phi), DensityFlow::lindblad, h, &noise, 1.0,
                        2e-3, 1000, DensityMethod::rk4, 250);
  const auto reports = compare_ensemble_vs_density(ensemble, reference, observables);
  for (const auto& r : reports) {
    INFO(r.observable, " deviated by ", r.max_deviation_sigmas, " sigma");
    CHECK(r.passed);
  }

  // Negative control: a reference with the wrong potential must fail by a
  // wide margin somewhere along the flow.
  const OperatorMatrix wrong_h =
      hamiltonian_build(g, 1.0, 1.0, harmonic_potential(g, 1.0, 1.4));
  const DensitySeries wrong =
      integrate_density(pure_state_density(phi), DensityFlow::lindblad, wrong_h, &noise,
                        1.0, 2e-3, 1000, DensityMethod::rk4, 250);
  const auto wrong_reports = compare_ensemble_vs_density(ensemble, wrong, observables);
  double worst = 0.0;
  for (const auto& r : wrong_reports) worst = std::max(worst, r.max_deviation_sigmas);
  CHECK(worst > 10.0);
}

TEST_CASE("mean decay experiment: no noise means no decay") {
  const Grid g = Grid::make(48, 16.0);
  const OperatorMatrix h = harmonic_h(g);
  const StateVector phi = gaussian_packet(g, 1.0, 0.8);
  const MeanDecayResult result = mean_decay_experiment(
      phi, h, 0.0, XiDistribution::standard_gaussian, 1e-2, 100, 4, 5, 25, 0);
  for (const auto& row : result.mean_norm.rows) {
    CHECK(row.ensemble_value == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(row.reference_value == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(result.mean_norm.passed);
}

TEST_CASE("mean decay experiment tracks the dephasing envelope") {
  const Grid g = Grid::make(48, 16.0);
  const OperatorMatrix h = harmonic_h(g);
  const StateVector phi = gaussian_packet(g, 1.0, 0.8);
  const MeanDecayResult result = mean_decay_experiment(
      phi, h, 0.5, XiDistribution::standard_gaussian, 1e-2, 200, 2000, 71, 50, 0);
  CHECK(result.mean_norm.passed);
  for (const auto& r : result.covariance_checks) {
    INFO(r.observable, " deviated by ", r.max_deviation_sigmas, " sigma");
    CHECK(r.passed);
  }

  // Wrong gamma in the reference is a loud failure at later times.
  const double wrong_gamma = 1.0;
  double worst = 0.0;
  for (const auto& row : result.mean_norm.rows) {
    const double wrong_ref = std::exp(-0.5 * wrong_gamma * wrong_gamma * row.time);
    if (row.std_error > 0.0) {
      worst = std::max(worst,
                       std::abs(row.ensemble_value - wrong_ref) / row.std_error);
    }
  }
  CHECK(worst > 10.0);
}

TEST_CASE("weak convergence study sees first-order euler bias") {
  const Grid g = Grid::make(32, 16.0);
  OperatorMatrix h0;
  h0.entries = Matrix::Zero(g.n_points, g.n_points);
  h0.hermitian = true;
  const NoiseModel noise =
      NoiseModel::random_general(g, 2.0, 999, XiDistribution::standard_gaussian);
  const StateVector phi = gaussian_packet(g, 0.0, 1.0);

  const ConvergenceReport report = weak_convergence_study(
      phi, h0, noise, {8e-3, 4e-3, 2e-3}, 1.0, 4000, 2024, 0, StepScheme::euler);
  INFO("fitted slope ", report.fitted_slope);
  CHECK(report.statistically_conclusive);
  CHECK(report.passed);
  CHECK(report.fitted_slope == doctest::Approx(1.0).epsilon(0.3));

  // Successive biases roughly halve.
  REQUIRE(report.points.size() == 3);
  CHECK(report.points[0].error / report.points[1].error ==
        doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("split scheme bias stays below the statistical floor") {
  const Grid g = Grid::make(32, 16.0);
  const OperatorMatrix h = harmonic_h(g);
  const NoiseModel noise = NoiseModel::dephasing(g, 0.5, XiDistribution::standard_gaussian);
  const StateVector phi = gaussian_packet(g, 0.0, 1.0);
  const ConvergenceReport report = weak_convergence_study(
      phi, h, noise, {4e-2, 2e-2, 1e-2}, 1.0, 500, 13, 0, StepScheme::exact_split);
  CHECK(report.mode == ConvergenceMode::below_floor);
  CHECK(report.passed);
}

TEST_CASE("analytic oracle closed forms") {
  const Grid g = Grid::make(256, 20.0);
  const std::vector<double> times{0.0, 1.0, 2.0};

  OracleParams ground;
  const OracleSeries gs = analytic_oracles(OracleKind::ground_state, ground, g, times);
  CHECK(gs.energy == doctest::Approx(0.5));
  CHECK(gs.variance[0] == doctest::Approx(0.5));

  OracleParams coherent;
  coherent.x0 = 2.0;
  const OracleSeries cs =
      analytic_oracles(OracleKind::harmonic_coherent, coherent, g, times);
  CHECK(cs.x_mean[1] == doctest::Approx(2.0 * std::cos(1.0)));
  CHECK(cs.p_mean[1] == doctest::Approx(-2.0 * std::sin(1.0)));
  CHECK(cs.energy == doctest::Approx(0.5 + 2.0));

  OracleParams free_packet;
  free_packet.sigma0 = 1.0;
  const OracleSeries fs =
      analytic_oracles(OracleKind::free_gaussian, free_packet, g, times);
  CHECK(fs.variance[0] == doctest::Approx(1.0));
  CHECK(fs.variance[2] == doctest::Approx(2.0));
  CHECK(fs.energy == doctest::Approx(0.125));

  // Unresolvable parameters are rejected.
  const Grid coarse = Grid::make(8, 20.0);
  OracleParams narrow;
  narrow.sigma0 = 1.0;
  CHECK_THROWS_AS(analytic_oracles(OracleKind::free_gaussian, narrow, coarse, times),
                  std::invalid_argument);
}

TEST_CASE("comparison report flags absolute-floor and threshold violations") {
  const std::vector<double> times{0.0, 1.0};
  const ComparisonReport pass = make_comparison(
      "x", times, {1.0, 2.0}, {0.0, 0.1}, {1.0, 2.2}, 3.0, 1e-10);
  CHECK(pass.passed);
  CHECK(pass.rows[0].deviation_sigmas == 0.0);

  const ComparisonReport fail = make_comparison(
      "x", times, {1.0, 2.0}, {0.0, 0.1}, {1.0, 2.5}, 3.0, 1e-10);
  CHECK_FALSE(fail.passed);
  CHECK(fail.max_deviation_sigmas == doctest::Approx(5.0));
}
