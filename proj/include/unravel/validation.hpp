#pragma once

#include <string>
#include <vector>

#include "unravel/density.hpp"
#include "unravel/functionals.hpp"
#include "unravel/stochastic.hpp"

namespace unravel {

struct ComparisonRow {
  double time = 0.0;
  double ensemble_value = 0.0;
  double std_error = 0.0;
  double reference_value = 0.0;
  double deviation_sigmas = 0.0;
};

/// Ensemble observable against a reference curve, deviation measured in
/// units of the ensemble standard error. A row passes when
/// |ensemble - reference| <= threshold_sigmas * std_error + absolute_floor;
/// the floor covers deterministic cases whose standard error vanishes.
struct ComparisonReport {
  std::string observable;
  std::vector<ComparisonRow> rows;
  double max_deviation_sigmas = 0.0;
  double threshold_sigmas = 3.0;
  double absolute_floor = 1e-10;
  bool passed = true;
};

ComparisonReport make_comparison(const std::string& observable,
                                 const std::vector<double>& times,
                                 const std::vector<double>& ensemble_values,
                                 const std::vector<double>& std_errors,
                                 const std::vector<double>& reference_values,
                                 double threshold_sigmas = 3.0,
                                 double absolute_floor = 1e-10);

/// For each tracked observable, compares the ensemble means against
/// dx * Tr(A rho_ref(t)). Both sides contract through the same bilinear
/// kernel. The reference series must carry identical time stamps; the
/// ensemble must have been run with the observables tracked.
std::vector<ComparisonReport> compare_ensemble_vs_density(
    const EnsembleSeries& ensemble, const DensitySeries& reference,
    const std::vector<BilinearFunctional>& observables,
    double threshold_sigmas = 3.0, double absolute_floor = 1e-10);

struct MeanDecayResult {
  ComparisonReport mean_norm;                      // |sigma_hat(t)| vs decay law
  std::vector<ComparisonReport> covariance_checks; // rho_hat vs Liouville flow
  EnsembleSeries series;
};

/// Dephasing experiment, G = gamma * identity: the ensemble mean field must
/// decay as exp(-gamma^2 t / 2) while the covariance keeps following the
/// noiseless Liouville flow.
MeanDecayResult mean_decay_experiment(const StateVector& initial,
                                      const OperatorMatrix& h, double gamma,
                                      XiDistribution xi, double tau, long n_steps,
                                      long m_trajectories, uint64_t base_seed,
                                      long stride, int threads, double mu = 1.0);

enum class ConvergenceMode {
  slope_fit,    // log-log fit of bias against the swept parameter
  below_floor,  // every error under threshold_sigmas standard errors
};

struct ConvergencePoint {
  double parameter = 0.0;
  double error = 0.0;
  double std_error = 0.0;
};

struct ConvergenceReport {
  std::string parameter_name;
  ConvergenceMode mode = ConvergenceMode::slope_fit;
  std::vector<ConvergencePoint> points;
  double fitted_slope = 0.0;
  double expected_slope = 1.0;
  double slope_tolerance = 0.3;
  bool statistically_conclusive = true;
  bool passed = false;
};

/// Sweeps the step size at a fixed horizon and measures the bias of the
/// mean norm, |<N>(T) - 1|, whose exact value is zero for the continuous
/// flow. With the euler scheme the bias is first order in tau; with the
/// split scheme (hermitian G) it sits below the statistical floor.
ConvergenceReport weak_convergence_study(const StateVector& initial,
                                         const OperatorMatrix& h,
                                         const NoiseModel& noise,
                                         const std::vector<double>& tau_values,
                                         double horizon, long m_trajectories,
                                         uint64_t base_seed, int threads,
                                         StepScheme scheme, double mu = 1.0);

enum class OracleKind { harmonic_coherent, free_gaussian, ground_state };

struct OracleParams {
  double mass = 1.0;
  double omega = 1.0;
  double mu = 1.0;
  double x0 = 0.0;      // displacement (harmonic_coherent)
  double sigma0 = 1.0;  // initial width (free_gaussian)
};

struct OracleSeries {
  std::vector<double> times;
  std::vector<double> x_mean;
  std::vector<double> p_mean;
  std::vector<double> variance;
  double energy = 0.0;
};

/// Closed-form reference curves for the three textbook scenarios. Throws
/// when the requested state is unresolvable on the grid.
OracleSeries analytic_oracles(OracleKind kind, const OracleParams& params,
                              const Grid& grid, const std::vector<double>& times);

/// Initial state matching an oracle scenario.
StateVector oracle_initial_state(OracleKind kind, const OracleParams& params,
                                 const Grid& grid, const OperatorMatrix& h);

/// Reference flow of the ensemble mean, d sigma/dt = H sigma/(i mu) - K sigma/2,
/// integrated with rk4 at the given resolution and sampled at `times`.
std::vector<Vector> mean_field_reference(const StateVector& initial,
                                         const OperatorMatrix& h,
                                         const NoiseModel& noise, double mu,
                                         const std::vector<double>& times,
                                         double tau_fine);

/// Mean and standard error of the per-trajectory projection
/// s = dx * Re(u^dagger phi) for a fixed probe direction u.
struct ProjectionStats {
  double mean = 0.0;
  double std_error = 0.0;
};
ProjectionStats linear_projection_stats(const EnsembleAccumulator& acc, const Vector& u);

}  // namespace unravel
