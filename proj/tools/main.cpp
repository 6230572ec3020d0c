#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "unravel/acceptance.hpp"
#include "unravel/config.hpp"
#include "unravel/density.hpp"
#include "unravel/functionals.hpp"
#include "unravel/results.hpp"
#include "unravel/states.hpp"
#include "unravel/stochastic.hpp"
#include "unravel/validation.hpp"

namespace {

using namespace unravel;

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;
constexpr int kExitValidationFailure = 4;

struct CliContext {
  std::string config_path;
  std::string out_dir = ".";
  std::string format_override;
  std::optional<uint64_t> seed_override;
  int threads = 0;
};

struct RunSetup {
  SimulationConfig config;
  Grid grid;
  OperatorMatrix h;
  std::vector<BilinearFunctional> observables;  // x, p, H
};

RunSetup make_setup(const CliContext& ctx) {
  if (ctx.config_path.empty()) {
    throw ConfigError("<cli>", 0, "--config", "a configuration file is required");
  }
  RunSetup setup{parse_config_file(ctx.config_path), {}, {}, {}};
  if (ctx.seed_override) setup.config.base_seed = *ctx.seed_override;
  if (ctx.format_override == "csv") setup.config.format = OutputFormat::csv;
  if (ctx.format_override == "json") setup.config.format = OutputFormat::json;
  setup.grid = grid_from(setup.config);
  setup.h = hamiltonian_from(setup.config, setup.grid);
  setup.observables.push_back({position_operator(setup.grid), "x"});
  setup.observables.push_back({momentum_operator(setup.grid, 1.0), "p"});
  setup.observables.push_back({setup.h, "H"});
  return setup;
}

std::string output_path(const CliContext& ctx, const RunSetup& setup,
                        const std::string& subcommand) {
  std::filesystem::create_directories(ctx.out_dir);
  const std::string stem =
      setup.config.prefix.empty() ? subcommand : setup.config.prefix;
  const char* ext = setup.config.format == OutputFormat::csv ? ".csv" : ".json";
  return ctx.out_dir + "/" + stem + ext;
}

void emit(const CliContext& ctx, const RunSetup& setup, const std::string& subcommand,
          ResultRecord record) {
  record.config_echo = config_echo(setup.config);
  record.run_id = make_run_id(subcommand, record.config_echo, setup.config.base_seed);
  const std::string path = output_path(ctx, setup, subcommand);
  if (setup.config.format == OutputFormat::csv) {
    write_csv(record, path);
  } else {
    write_json(record, path);
  }
  std::cout << record.run_id << " -> " << path << "\n";
}

int run_trajectory_cmd(const CliContext& ctx) {
  const RunSetup setup = make_setup(ctx);
  const NoiseModel noise = noise_from(setup.config, setup.grid);
  const StateVector initial = initial_state_from(setup.config, setup.grid, setup.h);
  const TrajectoryRun run = run_trajectory(
      initial, setup.h, noise, setup.config.tau, setup.config.n_steps,
      setup.config.scheme, setup.config.base_seed, setup.config.stride);

  ResultRecord record;
  record.columns = {"time", "norm", "energy", "x_mean", "p_mean"};
  for (size_t i = 0; i < run.times.size(); ++i) {
    const StateVector& s = run.snapshots[i];
    record.rows.push_back({run.times[i], norm_value(s),
                           evaluate(setup.observables[2], s).real(),
                           evaluate(setup.observables[0], s).real(),
                           evaluate(setup.observables[1], s).real()});
  }
  emit(ctx, setup, "trajectory", std::move(record));
  return 0;
}

int run_ensemble_cmd(const CliContext& ctx) {
  const RunSetup setup = make_setup(ctx);
  const NoiseModel noise = noise_from(setup.config, setup.grid);
  const StateVector initial = initial_state_from(setup.config, setup.grid, setup.h);

  EnsembleOptions options;
  options.tau = setup.config.tau;
  options.n_steps = setup.config.n_steps;
  options.m_trajectories = setup.config.trajectories;
  options.scheme = setup.config.scheme;
  options.base_seed = setup.config.base_seed;
  options.stride = setup.config.stride;
  options.threads = ctx.threads;
  const EnsembleSeries series =
      run_ensemble(initial, setup.h, noise, options, setup.observables);

  ResultRecord record;
  record.columns = {"time",   "mean_norm", "sigma_norm", "sigma_norm_se",
                    "trace",  "x_mean",    "x_se",       "p_mean",
                    "p_se",   "energy_mean", "energy_se"};
  for (size_t i = 0; i < series.times.size(); ++i) {
    const EnsembleAccumulator& acc = series.stamps[i];
    const DensityMatrix rho = estimate_covariance(acc);
    record.rows.push_back({series.times[i], acc.mean_norm(), acc.sigma_norm(),
                           acc.sigma_norm_std_error(), density_trace(rho),
                           acc.observable_mean(0), acc.observable_std_error(0),
                           acc.observable_mean(1), acc.observable_std_error(1),
                           acc.observable_mean(2), acc.observable_std_error(2)});
    if (setup.config.snapshots) {
      record.snapshot_times.push_back(series.times[i]);
      record.snapshots.push_back(rho.entries);
    }
  }
  emit(ctx, setup, "ensemble", std::move(record));
  return 0;
}

int run_density_cmd(const CliContext& ctx, DensityFlow flow) {
  const RunSetup setup = make_setup(ctx);
  const NoiseModel noise = noise_from(setup.config, setup.grid);
  const StateVector initial = initial_state_from(setup.config, setup.grid, setup.h);
  const DensityMatrix rho0 = pure_state_density(initial);
  const DensityMethod method = flow == DensityFlow::lindblad
                                   ? DensityMethod::rk4
                                   : setup.config.density_method;
  const DensitySeries series =
      integrate_density(rho0, flow, setup.h, &noise, 1.0, setup.config.tau,
                        setup.config.n_steps, method, setup.config.stride);

  ResultRecord record;
  record.columns = {"time", "trace", "purity", "energy", "x_mean", "p_mean"};
  for (size_t i = 0; i < series.times.size(); ++i) {
    const DensityMatrix& rho = series.states[i];
    record.rows.push_back(
        {series.times[i], density_trace(rho), purity(rho),
         expectation_from_covariance(setup.observables[2], rho).real(),
         expectation_from_covariance(setup.observables[0], rho).real(),
         expectation_from_covariance(setup.observables[1], rho).real()});
    if (setup.config.snapshots) {
      record.snapshot_times.push_back(series.times[i]);
      record.snapshots.push_back(rho.entries);
    }
  }
  emit(ctx, setup, flow == DensityFlow::lindblad ? "lindblad" : "liouville",
       std::move(record));
  return 0;
}

int run_schrodinger_cmd(const CliContext& ctx) {
  const RunSetup setup = make_setup(ctx);
  const StateVector initial = initial_state_from(setup.config, setup.grid, setup.h);
  const StateSeries series = schrodinger_propagate(
      initial, setup.h, 1.0, setup.config.tau, setup.config.n_steps,
      setup.config.wave_method, setup.config.stride);

  OperatorMatrix x2 = position_operator(setup.grid);
  x2.entries = x2.entries * x2.entries;
  const BilinearFunctional xsq{x2, "x^2"};

  ResultRecord record;
  record.columns = {"time", "norm", "energy", "x_mean", "p_mean", "variance"};
  for (size_t i = 0; i < series.times.size(); ++i) {
    const StateVector& s = series.states[i];
    const double x_mean = evaluate(setup.observables[0], s).real();
    record.rows.push_back({series.times[i], norm_value(s),
                           evaluate(setup.observables[2], s).real(), x_mean,
                           evaluate(setup.observables[1], s).real(),
                           evaluate(xsq, s).real() - x_mean * x_mean});
  }
  emit(ctx, setup, "schrodinger", std::move(record));
  return 0;
}

int run_converge_cmd(const CliContext& ctx) {
  const RunSetup setup = make_setup(ctx);
  if (setup.config.tau_values.empty()) {
    throw ConfigError(ctx.config_path, 0, "converge.tau_values",
                      "the converge subcommand needs a list of step sizes");
  }
  const NoiseModel noise = noise_from(setup.config, setup.grid);
  const StateVector initial = initial_state_from(setup.config, setup.grid, setup.h);
  const ConvergenceReport report = weak_convergence_study(
      initial, setup.h, noise, setup.config.tau_values, setup.config.horizon,
      setup.config.trajectories, setup.config.base_seed, ctx.threads,
      setup.config.scheme);

  ResultRecord record;
  record.columns = {"tau", "error", "std_error"};
  for (const auto& p : report.points) {
    record.rows.push_back({p.parameter, p.error, p.std_error});
  }
  emit(ctx, setup, "converge", std::move(record));

  std::cout << "mode: "
            << (report.mode == ConvergenceMode::slope_fit ? "slope_fit" : "below_floor")
            << ", fitted slope " << report.fitted_slope << " (expected "
            << report.expected_slope << " +/- " << report.slope_tolerance << "), "
            << (report.statistically_conclusive ? "conclusive" : "INCONCLUSIVE") << ", "
            << (report.passed ? "pass" : "fail") << "\n";
  return 0;
}

int run_validate_cmd(const CliContext& ctx, const char* argv0) {
  AcceptanceOptions options;
  options.threads = ctx.threads;
  options.cli_path = argv0;
  options.work_dir = ctx.out_dir;
  std::filesystem::create_directories(ctx.out_dir);
  const auto results = run_acceptance_suite(options);
  bool all_passed = true;
  for (const auto& r : results) {
    std::cout << format_criterion_line(r) << "\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : kExitValidationFailure;
}

void print_machine_error(const std::string& kind, const std::string& message) {
  nlohmann::json err;
  err["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unravel: stochastic wave-field simulator and validation suite"};
  app.require_subcommand(1);

  CliContext ctx;
  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", ctx.config_path, "configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", [&ctx](const CLI::results_t& values) {
      ctx.seed_override = std::stoull(values.at(0));
      return true;
    }, "override ensemble.base_seed");
    cmd->add_option("--out", ctx.out_dir, "output directory");
    cmd->add_option("--format", ctx.format_override, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", ctx.threads, "worker threads (0 = hardware)");
  };

  auto* trajectory = app.add_subcommand("trajectory", "single stochastic trajectory");
  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble statistics");
  auto* liouville = app.add_subcommand("liouville", "density flow without dissipator");
  auto* lindblad = app.add_subcommand("lindblad", "density flow with dissipator");
  auto* schrodinger = app.add_subcommand("schrodinger", "deterministic wave propagation");
  auto* validate = app.add_subcommand("validate", "run the acceptance checks");
  auto* converge = app.add_subcommand("converge", "weak convergence study");
  add_common(trajectory, true);
  add_common(ensemble, true);
  add_common(liouville, true);
  add_common(lindblad, true);
  add_common(schrodinger, true);
  add_common(validate, false);
  add_common(converge, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (trajectory->parsed()) return run_trajectory_cmd(ctx);
    if (ensemble->parsed()) return run_ensemble_cmd(ctx);
    if (liouville->parsed()) return run_density_cmd(ctx, DensityFlow::liouville);
    if (lindblad->parsed()) return run_density_cmd(ctx, DensityFlow::lindblad);
    if (schrodinger->parsed()) return run_schrodinger_cmd(ctx);
    if (validate->parsed()) return run_validate_cmd(ctx, argv[0]);
    if (converge->parsed()) return run_converge_cmd(ctx);
  } catch (const ConfigError& e) {
    print_machine_error("config", e.what());
    return kExitConfigError;
  } catch (const NumericalError& e) {
    print_machine_error("numerical", e.what());
    return kExitNumericalError;
  } catch (const std::invalid_argument& e) {
    print_machine_error("config", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    print_machine_error("internal", e.what());
    return kExitNumericalError;
  }
  return 0;
}
