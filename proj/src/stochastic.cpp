#include "unravel/stochastic.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

#include "unravel/states.hpp"

namespace unravel {

namespace {

constexpr long kBlockSize = 64;  // trajectories per reduction block

// Affine Euler map phi' = A phi + (i sqrt(tau) xi) B phi with
// A = I + tau H/(i mu) - tau K/2 and B = G.
struct EulerStepper {
  Matrix a;
  const Matrix* g = nullptr;
  double sqrt_tau = 0.0;
  Vector t1, t2;

  EulerStepper(const OperatorMatrix& h, const NoiseModel& noise, double tau, double mu) {
    const Eigen::Index n = h.dim();
    a = Matrix::Identity(n, n) + (tau / Complex(0.0, mu)) * h.entries -
        (0.5 * tau) * noise.k.entries;
    g = &noise.g.entries;
    sqrt_tau = std::sqrt(tau);
    t1.resize(n);
    t2.resize(n);
  }

  void step(Vector& phi, double xi) {
    t1.noalias() = a * phi;
    t2.noalias() = (*g) * phi;
    phi = t1 + Complex(0.0, sqrt_tau * xi) * t2;
  }
};

struct SplitStepper {
  const SplitPropagator* prop;
  Vector t1, t2;

  explicit SplitStepper(const SplitPropagator& p) : prop(&p) {
    t1.resize(p.u.rows());
    t2.resize(p.u.rows());
  }

  void step(Vector& phi, double xi) {
    t1.noalias() = prop->u * phi;
    const double s = std::sqrt(prop->tau) * xi;
    if (prop->scalar_phase) {
      phi = std::polar(1.0, s * prop->gamma) * t1;
      return;
    }
    t2.noalias() = prop->g_vectors.adjoint() * t1;
    for (Eigen::Index i = 0; i < t2.size(); ++i) {
      t2(i) *= std::polar(1.0, s * prop->g_values(i));
    }
    phi.noalias() = prop->g_vectors * t2;
  }
};

void throw_instability(const OperatorMatrix& h, double tau, long step, long trajectory) {
  const double hnorm = spectral_norm_estimate(h.entries, 30);
  std::string msg = "stochastic step produced non-finite amplitudes at step " +
                    std::to_string(step);
  if (trajectory >= 0) msg += " (trajectory " + std::to_string(trajectory) + ")";
  msg += "; tau = " + std::to_string(tau);
  if (hnorm > 0.0) {
    msg += ", suggested bound tau <= " + std::to_string(0.1 / hnorm);
  }
  throw NumericalError(msg, step, trajectory);
}

}  // namespace

TrajectoryState make_trajectory_state(StateVector state, uint64_t seed,
                                      XiDistribution dist) {
  return TrajectoryState{std::move(state), 0.0, XiSampler(seed, dist)};
}

TrajectoryState step_euler(TrajectoryState traj, const OperatorMatrix& h,
                           const NoiseModel& noise, double tau, double mu) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("step_euler: tau must be positive");
  }
  if (h.dim() != traj.state.size() || noise.g.dim() != traj.state.size()) {
    throw std::invalid_argument("step_euler: dimension mismatch");
  }
  EulerStepper stepper(h, noise, tau, mu);
  const double xi = traj.rng.draw();
  stepper.step(traj.state.amplitudes, xi);
  if (!traj.state.amplitudes.allFinite()) {
    throw_instability(h, tau, 0, -1);
  }
  traj.time += tau;
  return traj;
}

SplitPropagator make_split_propagator(const OperatorMatrix& h, const NoiseModel& noise,
                                      double tau, double mu) {
  if (!noise.phase_preserving_norm) {
    throw std::invalid_argument(
        "make_split_propagator: the split scheme requires hermitian G");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("make_split_propagator: tau must be positive");
  }
  SplitPropagator prop;
  prop.tau = tau;
  prop.u = unitary_propagator(h, mu, tau);
  if (noise.scalar_dephasing) {
    prop.scalar_phase = true;
    prop.gamma = noise.gamma;
  } else {
    OperatorMatrix g = noise.g;
    g.entries = 0.5 * (g.entries + g.entries.adjoint());
    auto [vals, vecs] = hermitian_eigensystem(g);
    prop.g_values = std::move(vals);
    prop.g_vectors = std::move(vecs);
  }
  return prop;
}

TrajectoryState step_exact_split(TrajectoryState traj, const SplitPropagator& prop,
                                 const NoiseModel& noise) {
  if (!noise.phase_preserving_norm) {
    throw std::invalid_argument("step_exact_split: requires hermitian G");
  }
  SplitStepper stepper(prop);
  const double xi = traj.rng.draw();
  stepper.step(traj.state.amplitudes, xi);
  traj.time += prop.tau;
  return traj;
}

namespace {

// Shared trajectory loop: steps phi in place, tracking norm deviation and
// invoking `record` after each recorded step.
template <typename Stepper, typename Record>
double evolve(Vector& phi, Stepper& stepper, XiSampler& rng, double dx, double tau,
              long n_steps, long stride, const OperatorMatrix& h, long trajectory,
              Record&& record) {
  double max_dev = std::abs(dx * phi.squaredNorm() - 1.0);
  for (long s = 1; s <= n_steps; ++s) {
    const double xi = rng.draw();
    stepper.step(phi, xi);
    if (!phi.allFinite()) {
      throw_instability(h, tau, s, trajectory);
    }
    max_dev = std::max(max_dev, std::abs(dx * phi.squaredNorm() - 1.0));
    if (s % stride == 0 || s == n_steps) {
      record(s);
    }
  }
  return max_dev;
}

std::vector<double> snapshot_times(double tau, long n_steps, long stride) {
  std::vector<double> times{0.0};
  for (long s = 1; s <= n_steps; ++s) {
    if (s % stride == 0 || s == n_steps) times.push_back(s * tau);
  }
  return times;
}

}  // namespace

TrajectoryRun run_trajectory(const StateVector& initial, const OperatorMatrix& h,
                             const NoiseModel& noise, double tau, long n_steps,
                             StepScheme scheme, uint64_t seed, long stride, double mu) {
  if (n_steps < 0 || stride < 1) {
    throw std::invalid_argument("run_trajectory: bad n_steps or stride");
  }
  TrajectoryRun run{{}, {}, 0.0, make_trajectory_state(initial, seed, noise.xi)};
  run.times.push_back(0.0);
  run.snapshots.push_back(initial);

  Vector& phi = run.final_state.state.amplitudes;
  const double dx = initial.grid.spacing;
  const auto record = [&](long s) {
    run.times.push_back(s * tau);
    StateVector snap;
    snap.grid = initial.grid;
    snap.amplitudes = phi;
    run.snapshots.push_back(std::move(snap));
  };

  if (scheme == StepScheme::euler) {
    EulerStepper stepper(h, noise, tau, mu);
    run.max_norm_deviation = evolve(phi, stepper, run.final_state.rng, dx, tau, n_steps,
                                    stride, h, -1, record);
  } else {
    const SplitPropagator prop = make_split_propagator(h, noise, tau, mu);
    SplitStepper stepper(prop);
    run.max_norm_deviation = evolve(phi, stepper, run.final_state.rng, dx, tau, n_steps,
                                    stride, h, -1, record);
  }
  run.final_state.time = n_steps * tau;
  return run;
}

void EnsembleAccumulator::init(const Grid& g, size_t n_observables) {
  grid = g;
  count = 0;
  sum_phi = Vector::Zero(g.n_points);
  sum_outer = Matrix::Zero(g.n_points, g.n_points);
  sum_outer_sym = Matrix::Zero(g.n_points, g.n_points);
  sum_norm = 0.0;
  observable_sum.assign(n_observables, 0.0);
  observable_sum_sq.assign(n_observables, 0.0);
}

void EnsembleAccumulator::add(const Vector& phi, const std::vector<Matrix>& tracked_kernels) {
  count += 1;
  sum_phi += phi;
  sum_outer.noalias() += phi * phi.adjoint();
  sum_outer_sym.noalias() += phi * phi.transpose();
  sum_norm += grid.spacing * phi.squaredNorm();
  for (size_t i = 0; i < tracked_kernels.size(); ++i) {
    const double a = (grid.spacing * phi.dot(tracked_kernels[i] * phi)).real();
    observable_sum[i] += a;
    observable_sum_sq[i] += a * a;
  }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  count += other.count;
  sum_phi += other.sum_phi;
  sum_outer += other.sum_outer;
  sum_outer_sym += other.sum_outer_sym;
  sum_norm += other.sum_norm;
  for (size_t i = 0; i < observable_sum.size(); ++i) {
    observable_sum[i] += other.observable_sum[i];
    observable_sum_sq[i] += other.observable_sum_sq[i];
  }
}

Vector EnsembleAccumulator::mean_phi() const {
  if (count < 1) throw std::invalid_argument("EnsembleAccumulator: empty");
  return sum_phi / static_cast<double>(count);
}

double EnsembleAccumulator::mean_norm() const {
  if (count < 1) throw std::invalid_argument("EnsembleAccumulator: empty");
  return sum_norm / static_cast<double>(count);
}

double EnsembleAccumulator::observable_mean(size_t i) const {
  return observable_sum.at(i) / static_cast<double>(count);
}

double EnsembleAccumulator::observable_std_error(size_t i) const {
  const auto m = static_cast<double>(count);
  if (count < 2) return 0.0;
  const double mean = observable_sum.at(i) / m;
  const double var = std::max(0.0, (observable_sum_sq.at(i) - m * mean * mean) / (m - 1.0));
  return std::sqrt(var / m);
}

double EnsembleAccumulator::sigma_norm() const {
  return std::sqrt(grid.spacing) * mean_phi().norm();
}

double EnsembleAccumulator::sigma_norm_std_error() const {
  if (count < 2) return 0.0;
  const auto m = static_cast<double>(count);
  const Vector sigma = mean_phi();
  const double snorm = std::sqrt(grid.spacing) * sigma.norm();
  if (snorm == 0.0) return 0.0;
  // Per-trajectory scalar s = dx * Re(u^dagger phi) with u the normalized
  // mean direction; its sample mean is exactly sigma_norm and its second
  // moment is recoverable from the stored quadratic sums.
  const Vector u = sigma / (std::sqrt(grid.spacing) * sigma.norm());
  const double dx = grid.spacing;
  const Complex q_herm = u.dot(sum_outer * u);                      // u^dag S u
  const Complex q_sym = u.dot(sum_outer_sym * u.conjugate());       // conj(u)^T T conj(u)
  const double sum_sq = 0.5 * dx * dx * (q_herm.real() + q_sym.real());
  const double var = std::max(0.0, (sum_sq - m * snorm * snorm) / (m - 1.0));
  return std::sqrt(var / m);
}

EnsembleSeries run_ensemble(const StateVector& initial, const OperatorMatrix& h,
                            const NoiseModel& noise, const EnsembleOptions& options,
                            const std::vector<BilinearFunctional>& tracked) {
  if (options.m_trajectories < 1) {
    throw std::invalid_argument("run_ensemble: need at least one trajectory");
  }
  if (!(options.tau > 0.0) || options.n_steps < 0 || options.stride < 1) {
    throw std::invalid_argument("run_ensemble: bad integration parameters");
  }

  std::vector<Matrix> kernels;
  kernels.reserve(tracked.size());
  for (const auto& f : tracked) {
    if (f.kernel.dim() != initial.size()) {
      throw std::invalid_argument("run_ensemble: tracked observable dimension mismatch");
    }
    kernels.push_back(f.kernel.entries);
  }

  EnsembleSeries series;
  series.times = snapshot_times(options.tau, options.n_steps, options.stride);
  for (const auto& f : tracked) series.observable_labels.push_back(f.label);
  const size_t n_stamps = series.times.size();

  const long m = options.m_trajectories;
  const long n_blocks = (m + kBlockSize - 1) / kBlockSize;
  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = static_cast<int>(std::min<long>(threads, n_blocks));

  const SplitPropagator* split = nullptr;
  SplitPropagator split_storage;
  if (options.scheme == StepScheme::exact_split) {
    split_storage = make_split_propagator(h, noise, options.tau, options.mu);
    split = &split_storage;
  }

  std::vector<std::vector<EnsembleAccumulator>> partials(
      static_cast<size_t>(threads), std::vector<EnsembleAccumulator>(n_stamps));
  std::exception_ptr first_error;
  std::mutex error_mutex;

  const auto worker = [&](int w) {
    try {
      auto& acc = partials[static_cast<size_t>(w)];
      for (auto& a : acc) a.init(initial.grid, kernels.size());
      Vector phi(initial.size());

      std::unique_ptr<EulerStepper> euler;
      std::unique_ptr<SplitStepper> splitter;
      if (options.scheme == StepScheme::euler) {
        euler = std::make_unique<EulerStepper>(h, noise, options.tau, options.mu);
      } else {
        splitter = std::make_unique<SplitStepper>(*split);
      }

      for (long b = w; b < n_blocks; b += threads) {
        const long lo = b * kBlockSize;
        const long hi = std::min(m, lo + kBlockSize);
        for (long traj = lo; traj < hi; ++traj) {
          phi = initial.amplitudes;
          XiSampler rng(substream_seed(options.base_seed, static_cast<uint64_t>(traj)),
                        noise.xi);
          size_t stamp = 0;
          acc[stamp].add(phi, kernels);
          const auto record = [&](long) {
            ++stamp;
            acc[stamp].add(phi, kernels);
          };
          if (euler) {
            evolve(phi, *euler, rng, initial.grid.spacing, options.tau,
                   options.n_steps, options.stride, h, traj, record);
          } else {
            evolve(phi, *splitter, rng, initial.grid.spacing, options.tau,
                   options.n_steps, options.stride, h, traj, record);
          }
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  series.stamps.resize(n_stamps);
  for (size_t i = 0; i < n_stamps; ++i) {
    series.stamps[i].init(initial.grid, kernels.size());
    for (int w = 0; w < threads; ++w) {
      series.stamps[i].merge(partials[static_cast<size_t>(w)][i]);
    }
  }
  return series;
}

DensityMatrix estimate_covariance(const EnsembleAccumulator& acc) {
  if (acc.count < 1) {
    throw std::invalid_argument("estimate_covariance: empty accumulator");
  }
  DensityMatrix rho;
  rho.grid = acc.grid;
  rho.entries = acc.sum_outer / static_cast<double>(acc.count);
  return rho;
}

}  // namespace unravel
