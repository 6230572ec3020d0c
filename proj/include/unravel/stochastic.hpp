#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unravel/density.hpp"
#include "unravel/functionals.hpp"
#include "unravel/grid.hpp"
#include "unravel/noise.hpp"
#include "unravel/operators.hpp"
#include "unravel/rng.hpp"

namespace unravel {

enum class StepScheme { euler, exact_split };

/// One stochastic trajectory: the field, its clock, and its private noise
/// stream. Copyable; stepping a copy never perturbs the original.
struct TrajectoryState {
  StateVector state;
  double time = 0.0;
  XiSampler rng;
};

TrajectoryState make_trajectory_state(StateVector state, uint64_t seed,
                                      XiDistribution dist);

/// One step of the discretized stochastic flow,
///   phi <- phi + tau (H phi)/(i mu) + i sqrt(tau) xi (G phi) - tau (K phi)/2,
/// with a single scalar xi drawn from the trajectory's stream.
TrajectoryState step_euler(TrajectoryState traj, const OperatorMatrix& h,
                           const NoiseModel& noise, double tau, double mu = 1.0);

/// Precomputed factors for the split scheme: the exact Hamiltonian
/// propagator U(tau) and the spectral factorization of hermitian G used by
/// the phase substep exp(i sqrt(tau) xi G).
struct SplitPropagator {
  Matrix u;            // exp(-i tau H / mu)
  Matrix g_vectors;    // eigenvectors of G (empty on the scalar fast path)
  RealVector g_values; // eigenvalues of G
  bool scalar_phase = false;
  double gamma = 0.0;
  double tau = 0.0;
};

/// Throws unless the noise is norm-phase-preserving (hermitian G).
SplitPropagator make_split_propagator(const OperatorMatrix& h, const NoiseModel& noise,
                                      double tau, double mu = 1.0);

/// phi <- exp(i sqrt(tau) xi G) U(tau) phi. Both substeps are unitary, so
/// the norm is conserved to rounding at every step.
TrajectoryState step_exact_split(TrajectoryState traj, const SplitPropagator& prop,
                                 const NoiseModel& noise);

struct TrajectoryRun {
  std::vector<double> times;
  std::vector<StateVector> snapshots;
  double max_norm_deviation = 0.0;  // max over every step of |N(phi) - 1|
  TrajectoryState final_state;
};

/// Deterministic given (seed, scheme, parameters). Snapshots are recorded
/// at t = 0, every `stride` steps, and at the final step.
TrajectoryRun run_trajectory(const StateVector& initial, const OperatorMatrix& h,
                             const NoiseModel& noise, double tau, long n_steps,
                             StepScheme scheme, uint64_t seed, long stride = 1,
                             double mu = 1.0);

/// Sums over trajectories at one time stamp. Means are exactly the
/// arithmetic averages of the accumulated fields; the symmetric second
/// moment is kept so the standard error of any linear functional of the
/// field can be reconstructed afterwards.
struct EnsembleAccumulator {
  long count = 0;
  Vector sum_phi;
  Matrix sum_outer;      // sum of phi phi^dagger
  Matrix sum_outer_sym;  // sum of phi phi^T
  double sum_norm = 0.0; // sum of N(phi)
  std::vector<double> observable_sum;     // per tracked observable
  std::vector<double> observable_sum_sq;  // squares, for standard errors
  Grid grid;

  void init(const Grid& g, size_t n_observables);
  void add(const Vector& phi, const std::vector<Matrix>& tracked_kernels);
  void merge(const EnsembleAccumulator& other);

  Vector mean_phi() const;
  double mean_norm() const;
  double observable_mean(size_t i) const;
  double observable_std_error(size_t i) const;  // sample std / sqrt(count)

  /// Norm of the mean field under the grid weight.
  double sigma_norm() const;
  /// Standard error of sigma_norm, from the per-trajectory projections onto
  /// the mean direction (whose sample mean is exactly sigma_norm).
  double sigma_norm_std_error() const;
};

struct EnsembleOptions {
  double tau = 0.0;
  long n_steps = 0;
  long m_trajectories = 0;
  StepScheme scheme = StepScheme::euler;
  uint64_t base_seed = 0;
  long stride = 1;
  int threads = 0;  // 0 = hardware concurrency
  double mu = 1.0;
};

struct EnsembleSeries {
  std::vector<double> times;
  std::vector<EnsembleAccumulator> stamps;
  std::vector<std::string> observable_labels;
};

/// Runs m independent trajectories on decorrelated substreams derived from
/// (base_seed, trajectory index) and accumulates the time series of
/// ensemble sums. Trajectories are processed in fixed blocks assigned
/// round-robin to workers and merged in worker order, so a given thread
/// count always reproduces the same bits and different thread counts agree
/// to reassociation level.
EnsembleSeries run_ensemble(const StateVector& initial, const OperatorMatrix& h,
                            const NoiseModel& noise, const EnsembleOptions& options,
                            const std::vector<BilinearFunctional>& tracked = {});

/// rho_hat = (1/M) sum of phi phi^dagger; hermitian by construction, trace
/// equal to the mean squared norm of the accumulated trajectories.
DensityMatrix estimate_covariance(const EnsembleAccumulator& acc);

}  // namespace unravel
