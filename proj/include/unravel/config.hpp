#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unravel/density.hpp"
#include "unravel/noise.hpp"
#include "unravel/operators.hpp"
#include "unravel/stochastic.hpp"

namespace unravel {

/// Configuration parse or validation error, with enough location
/// information to point at the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, int line, std::string field, const std::string& message)
      : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : "") +
                           (field.empty() ? "" : " [" + field + "]") + ": " + message),
        path_(std::move(path)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string path_;
  int line_;
  std::string field_;
};

enum class PotentialKind { harmonic, free_particle, table };
enum class NoiseKind { none, dephasing, random_general, random_hermitian, random_mixed };
enum class InitialKind { gaussian, ground_state, plane_wave };
enum class OutputFormat { csv, json };

/// Everything a run needs, parsed from one key/value document with
/// sections. Unknown keys are rejected with their line number.
struct SimulationConfig {
  // [grid]
  int n_points = 64;
  double length = 20.0;

  // [physics]  (units fix mu = 1)
  double mass = 1.0;
  PotentialKind potential = PotentialKind::harmonic;
  double omega = 1.0;
  std::vector<double> potential_table;
  bool zero_hamiltonian = false;  // H = 0: pure-noise dynamics

  // [noise]
  NoiseKind noise_kind = NoiseKind::none;
  double gamma = 0.0;
  double noise_scale = 0.0;
  double noise_skew = 0.2;
  uint64_t g_seed = 1;
  XiDistribution xi = XiDistribution::standard_gaussian;

  // [initial]
  InitialKind initial = InitialKind::ground_state;
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  int mode = 1;

  // [integration]
  double tau = 1e-3;
  long n_steps = 1000;
  StepScheme scheme = StepScheme::euler;
  DensityMethod density_method = DensityMethod::rk4;
  WaveMethod wave_method = WaveMethod::eigendecomposition;

  // [ensemble]
  long trajectories = 1;
  uint64_t base_seed = 1;

  // [converge]
  std::vector<double> tau_values;
  double horizon = 1.0;

  // [output]
  long stride = 1;
  std::string prefix;
  OutputFormat format = OutputFormat::csv;
  bool snapshots = false;
};

SimulationConfig parse_config_file(const std::string& path);
SimulationConfig parse_config_text(const std::string& text, const std::string& path_label);

/// Canonical one-line-per-key echo of the configuration; two configs with
/// the same echo reproduce the same run bit for bit (given equal seeds and
/// thread counts).
std::string config_echo(const SimulationConfig& config);

Grid grid_from(const SimulationConfig& config);
OperatorMatrix hamiltonian_from(const SimulationConfig& config, const Grid& grid);
NoiseModel noise_from(const SimulationConfig& config, const Grid& grid);
StateVector initial_state_from(const SimulationConfig& config, const Grid& grid,
                               const OperatorMatrix& h);

}  // namespace unravel
