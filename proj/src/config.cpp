#include "unravel/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "unravel/states.hpp"

namespace unravel {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
  bool consumed = false;
};

using RawConfig = std::map<std::string, RawEntry>;  // "section.key" -> entry

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

RawConfig tokenize(const std::string& text, const std::string& path) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path, lineno, "", "malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ConfigError(path, lineno, "", "empty section name");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path, lineno, "", "expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(path, lineno, "", "empty key");
    }
    if (section.empty()) {
      throw ConfigError(path, lineno, key, "key outside any [section]");
    }
    const std::string full = section + "." + key;
    if (raw.count(full)) {
      throw ConfigError(path, lineno, full, "duplicate key");
    }
    raw[full] = RawEntry{value, lineno, false};
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig& raw, std::string path) : raw_(raw), path_(std::move(path)) {}

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    it->second.consumed = true;
    return it->second.value;
  }

  double get_double(const std::string& key, double fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    it->second.consumed = true;
    return parse_double(it->second.value, key, it->second.line);
  }

  long get_long(const std::string& key, long fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    it->second.consumed = true;
    try {
      size_t pos = 0;
      const long v = std::stol(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(path_, it->second.line, key,
                        "expected an integer, got '" + it->second.value + "'");
    }
  }

  uint64_t get_u64(const std::string& key, uint64_t fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    it->second.consumed = true;
    try {
      size_t pos = 0;
      const unsigned long long v = std::stoull(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("");
      return static_cast<uint64_t>(v);
    } catch (...) {
      throw ConfigError(path_, it->second.line, key,
                        "expected a nonnegative integer, got '" + it->second.value + "'");
    }
  }

  bool get_bool(const std::string& key, bool fallback) {
    const std::string v = get_string(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw error(key, "expected true/false, got '" + v + "'");
  }

  std::vector<double> get_double_list(const std::string& key) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return {};
    it->second.consumed = true;
    std::vector<double> values;
    std::string token;
    std::istringstream stream(it->second.value);
    while (stream >> token) {
      if (!token.empty() && token.back() == ',') token.pop_back();
      if (token.empty()) continue;
      values.push_back(parse_double(token, key, it->second.line));
    }
    return values;
  }

  ConfigError error(const std::string& key, const std::string& message) const {
    auto it = raw_.find(key);
    const int line = it != raw_.end() ? it->second.line : 0;
    return ConfigError(path_, line, key, message);
  }

  void reject_unconsumed() const {
    for (const auto& [key, entry] : raw_) {
      if (!entry.consumed) {
        throw ConfigError(path_, entry.line, key, "unknown key");
      }
    }
  }

 private:
  double parse_double(const std::string& text, const std::string& key, int line) {
    try {
      size_t pos = 0;
      const double v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(path_, line, key, "expected a number, got '" + text + "'");
    }
  }

  RawConfig& raw_;
  std::string path_;
};

void require_positive(const Reader& reader, const std::string& key, double value) {
  if (!(value > 0.0)) {
    throw reader.error(key, "must be positive, got " + std::to_string(value));
  }
}

}  // namespace

SimulationConfig parse_config_text(const std::string& text, const std::string& path_label) {
  RawConfig raw = tokenize(text, path_label);
  Reader reader(raw, path_label);
  SimulationConfig c;

  c.n_points = static_cast<int>(reader.get_long("grid.n_points", c.n_points));
  if (c.n_points < 2) throw reader.error("grid.n_points", "must be at least 2");
  c.length = reader.get_double("grid.length", c.length);
  require_positive(reader, "grid.length", c.length);

  c.mass = reader.get_double("physics.mass", c.mass);
  require_positive(reader, "physics.mass", c.mass);
  const std::string pot = reader.get_string("physics.potential", "harmonic");
  if (pot == "harmonic") {
    c.potential = PotentialKind::harmonic;
  } else if (pot == "free") {
    c.potential = PotentialKind::free_particle;
  } else if (pot == "table") {
    c.potential = PotentialKind::table;
  } else {
    throw reader.error("physics.potential",
                       "expected harmonic|free|table, got '" + pot + "'");
  }
  c.omega = reader.get_double("physics.omega", c.omega);
  if (c.potential == PotentialKind::harmonic) {
    require_positive(reader, "physics.omega", c.omega);
  }
  c.potential_table = reader.get_double_list("physics.values");
  if (c.potential == PotentialKind::table &&
      static_cast<int>(c.potential_table.size()) != c.n_points) {
    throw reader.error("physics.values",
                       "table has " + std::to_string(c.potential_table.size()) +
                           " entries, grid has " + std::to_string(c.n_points));
  }
  const std::string ham = reader.get_string("physics.hamiltonian", "standard");
  if (ham == "standard") {
    c.zero_hamiltonian = false;
  } else if (ham == "zero") {
    c.zero_hamiltonian = true;
  } else {
    throw reader.error("physics.hamiltonian",
                       "expected standard|zero, got '" + ham + "'");
  }

  const std::string noise = reader.get_string("noise.kind", "none");
  if (noise == "none") {
    c.noise_kind = NoiseKind::none;
  } else if (noise == "dephasing") {
    c.noise_kind = NoiseKind::dephasing;
  } else if (noise == "random_general") {
    c.noise_kind = NoiseKind::random_general;
  } else if (noise == "random_hermitian") {
    c.noise_kind = NoiseKind::random_hermitian;
  } else if (noise == "random_mixed") {
    c.noise_kind = NoiseKind::random_mixed;
  } else {
    throw reader.error(
        "noise.kind",
        "expected none|dephasing|random_general|random_hermitian|random_mixed, got '" +
            noise + "'");
  }
  c.gamma = reader.get_double("noise.gamma", c.gamma);
  if (c.gamma < 0.0) throw reader.error("noise.gamma", "must be nonnegative");
  c.noise_scale = reader.get_double("noise.scale", c.noise_scale);
  if (c.noise_scale < 0.0) throw reader.error("noise.scale", "must be nonnegative");
  c.noise_skew = reader.get_double("noise.skew", c.noise_skew);
  if (c.noise_skew < 0.0) throw reader.error("noise.skew", "must be nonnegative");
  c.g_seed = reader.get_u64("noise.g_seed", c.g_seed);
  const std::string xi = reader.get_string("noise.xi", "gaussian");
  if (xi == "gaussian") {
    c.xi = XiDistribution::standard_gaussian;
  } else if (xi == "rademacher") {
    c.xi = XiDistribution::rademacher;
  } else {
    throw reader.error("noise.xi", "expected gaussian|rademacher, got '" + xi + "'");
  }

  const std::string init = reader.get_string("initial.kind", "ground_state");
  if (init == "gaussian") {
    c.initial = InitialKind::gaussian;
  } else if (init == "ground_state") {
    c.initial = InitialKind::ground_state;
  } else if (init == "plane_wave") {
    c.initial = InitialKind::plane_wave;
  } else {
    throw reader.error("initial.kind",
                       "expected gaussian|ground_state|plane_wave, got '" + init + "'");
  }
  c.center = reader.get_double("initial.center", c.center);
  c.width = reader.get_double("initial.width", c.width);
  if (c.initial == InitialKind::gaussian) {
    require_positive(reader, "initial.width", c.width);
  }
  c.momentum = reader.get_double("initial.momentum", c.momentum);
  c.mode = static_cast<int>(reader.get_long("initial.mode", c.mode));

  c.tau = reader.get_double("integration.tau", c.tau);
  require_positive(reader, "integration.tau", c.tau);
  c.n_steps = reader.get_long("integration.n_steps", c.n_steps);
  if (c.n_steps < 0) throw reader.error("integration.n_steps", "must be nonnegative");
  const std::string scheme = reader.get_string("integration.scheme", "euler");
  if (scheme == "euler") {
    c.scheme = StepScheme::euler;
  } else if (scheme == "exact_split") {
    c.scheme = StepScheme::exact_split;
  } else {
    throw reader.error("integration.scheme",
                       "expected euler|exact_split, got '" + scheme + "'");
  }
  const std::string method = reader.get_string("integration.method", "rk4");
  if (method == "rk4") {
    c.density_method = DensityMethod::rk4;
    c.wave_method = WaveMethod::crank_nicolson;
  } else if (method == "exact" || method == "eigendecomposition") {
    c.density_method = DensityMethod::exact_unitary_conjugation;
    c.wave_method = WaveMethod::eigendecomposition;
  } else if (method == "crank_nicolson") {
    c.density_method = DensityMethod::rk4;
    c.wave_method = WaveMethod::crank_nicolson;
  } else {
    throw reader.error("integration.method",
                       "expected rk4|exact|eigendecomposition|crank_nicolson, got '" +
                           method + "'");
  }

  c.trajectories = reader.get_long("ensemble.trajectories", c.trajectories);
  if (c.trajectories < 1) throw reader.error("ensemble.trajectories", "must be >= 1");
  c.base_seed = reader.get_u64("ensemble.base_seed", c.base_seed);

  c.tau_values = reader.get_double_list("converge.tau_values");
  for (double t : c.tau_values) {
    if (!(t > 0.0)) throw reader.error("converge.tau_values", "entries must be positive");
  }
  c.horizon = reader.get_double("converge.horizon", c.horizon);
  require_positive(reader, "converge.horizon", c.horizon);

  c.stride = reader.get_long("output.stride", c.stride);
  if (c.stride < 1) throw reader.error("output.stride", "must be >= 1");
  c.prefix = reader.get_string("output.prefix", c.prefix);
  const std::string format = reader.get_string("output.format", "csv");
  if (format == "csv") {
    c.format = OutputFormat::csv;
  } else if (format == "json") {
    c.format = OutputFormat::json;
  } else {
    throw reader.error("output.format", "expected csv|json, got '" + format + "'");
  }
  c.snapshots = reader.get_bool("output.snapshots", c.snapshots);

  reader.reject_unconsumed();
  return c;
}

SimulationConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path, 0, "", "cannot open file");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* potential_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::free_particle: return "free";
    case PotentialKind::table: return "table";
  }
  return "?";
}

const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::dephasing: return "dephasing";
    case NoiseKind::random_general: return "random_general";
    case NoiseKind::random_hermitian: return "random_hermitian";
    case NoiseKind::random_mixed: return "random_mixed";
  }
  return "?";
}

const char* initial_name(InitialKind k) {
  switch (k) {
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::ground_state: return "ground_state";
    case InitialKind::plane_wave: return "plane_wave";
  }
  return "?";
}

}  // namespace

std::string config_echo(const SimulationConfig& c) {
  std::ostringstream out;
  out << "grid.n_points = " << c.n_points << "\n";
  out << "grid.length = " << fmt_double(c.length) << "\n";
  out << "physics.mass = " << fmt_double(c.mass) << "\n";
  out << "physics.potential = " << potential_name(c.potential) << "\n";
  out << "physics.omega = " << fmt_double(c.omega) << "\n";
  if (!c.potential_table.empty()) {
    out << "physics.values =";
    for (double v : c.potential_table) out << " " << fmt_double(v);
    out << "\n";
  }
  out << "physics.hamiltonian = " << (c.zero_hamiltonian ? "zero" : "standard") << "\n";
  out << "noise.kind = " << noise_name(c.noise_kind) << "\n";
  out << "noise.gamma = " << fmt_double(c.gamma) << "\n";
  out << "noise.scale = " << fmt_double(c.noise_scale) << "\n";
  out << "noise.skew = " << fmt_double(c.noise_skew) << "\n";
  out << "noise.g_seed = " << c.g_seed << "\n";
  out << "noise.xi = "
      << (c.xi == XiDistribution::standard_gaussian ? "gaussian" : "rademacher") << "\n";
  out << "initial.kind = " << initial_name(c.initial) << "\n";
  out << "initial.center = " << fmt_double(c.center) << "\n";
  out << "initial.width = " << fmt_double(c.width) << "\n";
  out << "initial.momentum = " << fmt_double(c.momentum) << "\n";
  out << "initial.mode = " << c.mode << "\n";
  out << "integration.tau = " << fmt_double(c.tau) << "\n";
  out << "integration.n_steps = " << c.n_steps << "\n";
  out << "integration.scheme = "
      << (c.scheme == StepScheme::euler ? "euler" : "exact_split") << "\n";
  out << "integration.method = "
      << (c.density_method == DensityMethod::exact_unitary_conjugation ? "exact"
                                                                       : "rk4")
      << "\n";
  out << "ensemble.trajectories = " << c.trajectories << "\n";
  out << "ensemble.base_seed = " << c.base_seed << "\n";
  if (!c.tau_values.empty()) {
    out << "converge.tau_values =";
    for (double v : c.tau_values) out << " " << fmt_double(v);
    out << "\n";
    out << "converge.horizon = " << fmt_double(c.horizon) << "\n";
  }
  out << "output.stride = " << c.stride << "\n";
  if (!c.prefix.empty()) out << "output.prefix = " << c.prefix << "\n";
  out << "output.format = " << (c.format == OutputFormat::csv ? "csv" : "json") << "\n";
  out << "output.snapshots = " << (c.snapshots ? "true" : "false") << "\n";
  return out.str();
}

Grid grid_from(const SimulationConfig& config) {
  return Grid::make(config.n_points, config.length);
}

OperatorMatrix hamiltonian_from(const SimulationConfig& config, const Grid& grid) {
  if (config.zero_hamiltonian) {
    OperatorMatrix h;
    h.entries = Matrix::Zero(grid.n_points, grid.n_points);
    h.hermitian = true;
    return h;
  }
  std::vector<double> v;
  switch (config.potential) {
    case PotentialKind::harmonic:
      v = harmonic_potential(grid, config.mass, config.omega);
      break;
    case PotentialKind::free_particle:
      v.assign(static_cast<size_t>(grid.n_points), 0.0);
      break;
    case PotentialKind::table:
      v = config.potential_table;
      break;
  }
  return hamiltonian_build(grid, 1.0, config.mass, v);
}

NoiseModel noise_from(const SimulationConfig& config, const Grid& grid) {
  switch (config.noise_kind) {
    case NoiseKind::none:
      return NoiseModel::none(grid);
    case NoiseKind::dephasing:
      return NoiseModel::dephasing(grid, config.gamma, config.xi);
    case NoiseKind::random_general:
      return NoiseModel::random_general(grid, config.noise_scale, config.g_seed,
                                        config.xi);
    case NoiseKind::random_hermitian:
      return NoiseModel::random_hermitian(grid, config.noise_scale, config.g_seed,
                                          config.xi);
    case NoiseKind::random_mixed:
      return NoiseModel::random_mixed(grid, config.noise_scale, config.noise_skew,
                                      config.g_seed, config.xi);
  }
  throw std::logic_error("noise_from: unknown kind");
}

StateVector initial_state_from(const SimulationConfig& config, const Grid& grid,
                               const OperatorMatrix& h) {
  switch (config.initial) {
    case InitialKind::gaussian:
      return gaussian_packet(grid, config.center, config.width, config.momentum);
    case InitialKind::ground_state:
      return ground_state(grid, h);
    case InitialKind::plane_wave:
      return plane_wave_state(grid, config.mode);
  }
  throw std::logic_error("initial_state_from: unknown kind");
}

}  // namespace unravel
