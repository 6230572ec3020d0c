#pragma once

#include <vector>

#include "unravel/grid.hpp"
#include "unravel/noise.hpp"
#include "unravel/operators.hpp"

namespace unravel {

/// Discretized covariance rho(x, x') sampled pointwise on the grid.
/// The trace convention follows the grid weight: Tr rho = dx * sum of the
/// diagonal, so a normalized ensemble has unit trace.
struct DensityMatrix {
  Matrix entries;
  Grid grid;

  Eigen::Index dim() const { return entries.rows(); }
};

/// rho = psi psi^dagger. Requires a normalized input; the error message
/// reports the offending norm.
DensityMatrix pure_state_density(const StateVector& psi);

/// dx * sum of the diagonal.
double density_trace(const DensityMatrix& rho);

/// Tr(rho^2) under the grid weight; 1 for pure states, 1/n when maximally
/// mixed over n grid points.
double purity(const DensityMatrix& rho);

/// Smallest eigenvalue of the hermitized matrix, for positivity monitoring.
double smallest_eigenvalue(const DensityMatrix& rho);

/// (H rho - rho H) / (i mu)
DensityMatrix liouville_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                            double mu);

/// (H rho - rho H) / (i mu) + G rho G^dagger - (K rho + rho K) / 2,
/// with K = G^dagger G taken from the noise model.
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& h,
                           const NoiseModel& noise, double mu);

enum class DensityFlow { liouville, lindblad };
enum class DensityMethod { rk4, exact_unitary_conjugation };

struct DensitySeries {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

/// Integrates the chosen flow, recording every `stride` steps (the initial
/// state is always recorded). The exact method conjugates by the propagator
/// of H and is only available for the Liouville flow; rk4 re-hermitizes
/// after every step. `noise` may be null for the Liouville flow.
DensitySeries integrate_density(const DensityMatrix& rho0, DensityFlow flow,
                                const OperatorMatrix& h, const NoiseModel* noise,
                                double mu, double tau, long n_steps,
                                DensityMethod method, long stride = 1);

enum class WaveMethod { eigendecomposition, crank_nicolson };

struct StateSeries {
  std::vector<double> times;
  std::vector<StateVector> states;
};

/// Integrates i mu dpsi/dt = H psi. The eigendecomposition method applies
/// the exact one-step propagator; Crank-Nicolson applies the Cayley
/// transform (I + i tau H / 2 mu)^-1 (I - i tau H / 2 mu), which is
/// unitary for hermitian H and second order in tau.
StateSeries schrodinger_propagate(const StateVector& psi0, const OperatorMatrix& h,
                                  double mu, double tau, long n_steps,
                                  WaveMethod method, long stride = 1);

/// exp(-i tau H / mu) via hermitian eigendecomposition.
Matrix unitary_propagator(const OperatorMatrix& h, double mu, double tau);

struct ConsistencyReport {
  std::vector<double> times;
  std::vector<double> deviations;  // max-entry |rho - psi psi^dagger| per stamp
  double max_deviation = 0.0;

  bool passed(double tolerance) const { return max_deviation <= tolerance; }
};

/// Compares a density series against the rank-one projectors of a state
/// series with identical time stamps.
ConsistencyReport consistency_check_pure(const DensitySeries& rho_series,
                                         const StateSeries& psi_series);

}  // namespace unravel
