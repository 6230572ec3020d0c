#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "unravel/config.hpp"
#include "unravel/results.hpp"

using namespace unravel;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const char* kGoodConfig =
    "# sample configuration\n"
    "[grid]\n"
    "n_points = 48\n"
    "length = 16.0\n"
    "[physics]\n"
    "mass = 1.0\n"
    "potential = harmonic\n"
    "omega = 1.0\n"
    "[noise]\n"
    "kind = dephasing\n"
    "gamma = 0.5\n"
    "xi = rademacher\n"
    "[initial]\n"
    "kind = gaussian\n"
    "center = 1.0\n"
    "width = 0.8\n"
    "[integration]\n"
    "tau = 0.01\n"
    "n_steps = 100\n"
    "scheme = exact_split\n"
    "[ensemble]\n"
    "trajectories = 16\n"
    "base_seed = 99\n"
    "[output]\n"
    "stride = 25\n"
    "format = json\n";

}  // namespace

TEST_CASE("config parsing: happy path") {
  const SimulationConfig c = parse_config_text(kGoodConfig, "good.ini");
  CHECK(c.n_points == 48);
  CHECK(c.length == doctest::Approx(16.0));
  CHECK(c.noise_kind == NoiseKind::dephasing);
  CHECK(c.gamma == doctest::Approx(0.5));
  CHECK(c.xi == XiDistribution::rademacher);
  CHECK(c.initial == InitialKind::gaussian);
  CHECK(c.scheme == StepScheme::exact_split);
  CHECK(c.trajectories == 16);
  CHECK(c.base_seed == 99);
  CHECK(c.stride == 25);
  CHECK(c.format == OutputFormat::json);

  const Grid grid = grid_from(c);
  const OperatorMatrix h = hamiltonian_from(c, grid);
  const NoiseModel noise = noise_from(c, grid);
  const StateVector initial = initial_state_from(c, grid, h);
  CHECK(noise.scalar_dephasing);
  CHECK(norm_value(initial) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("config parsing: unknown keys are rejected with location") {
  const std::string text = "[grid]\nn_points = 32\nlength = 8.0\nn_pts = 3\n";
  try {
    parse_config_text(text, "bad.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
    CHECK(e.field() == "grid.n_pts");
    CHECK(std::string(e.what()).find("bad.ini") != std::string::npos);
  }
}

TEST_CASE("config parsing: malformed and invalid values") {
  CHECK_THROWS_AS(parse_config_text("n_points = 4\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nn_points\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nn_points = two\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid]\nn_points = 1\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[integration]\ntau = -0.1\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[grid\nn_points = 4\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[grid]\nn_points = 4\nn_points = 8\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[physics]\npotential = cubic\n", "x.ini"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[physics]\npotential = table\nvalues = 1 2 3\n", "x.ini"),
      ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("config echo parses back to the same configuration") {
  const SimulationConfig c = parse_config_text(kGoodConfig, "good.ini");
  std::string ini;
  std::string current_section;
  std::istringstream echo(config_echo(c));
  std::string line;
  while (std::getline(echo, line)) {
    const auto dot = line.find('.');
    const std::string section = line.substr(0, dot);
    if (section != current_section) {
      ini += "[" + section + "]\n";
      current_section = section;
    }
    ini += line.substr(dot + 1) + "\n";
  }
  const SimulationConfig round = parse_config_text(ini, "echo.ini");
  CHECK(config_echo(round) == config_echo(c));
}

TEST_CASE("csv output: layout, precision, determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "unravel_test_csv";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();

  ResultRecord record;
  record.run_id = "test-0001";
  record.config_echo = "grid.n_points = 4\ngrid.length = 2\n";
  record.columns = {"time", "norm"};
  record.rows = {{0.0, 1.0}, {0.1, 1.0 / 3.0}};
  write_csv(record, path);

  const std::string first = slurp(path);
  CHECK(first.find("# run_id = test-0001") != std::string::npos);
  CHECK(first.find("# grid.n_points = 4") != std::string::npos);
  CHECK(first.find("time,norm") != std::string::npos);
  // 17 significant digits round-trip the third exactly.
  CHECK(first.find("0.33333333333333331") != std::string::npos);

  write_csv(record, path);
  CHECK(slurp(path) == first);

  // Header-only file for an empty series.
  ResultRecord empty;
  empty.run_id = "empty";
  empty.columns = {"time", "norm", "energy"};
  const std::string empty_path = (dir / "empty.csv").string();
  write_csv(empty, empty_path);
  const std::string contents = slurp(empty_path);
  CHECK(contents.find("time,norm,energy\n") != std::string::npos);
  std::istringstream lines(contents);
  std::string line;
  int data_rows = 0;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#' && line != "time,norm,energy") ++data_rows;
  }
  CHECK(data_rows == 0);

  // Column count mismatch is caught before writing.
  ResultRecord broken;
  broken.columns = {"time"};
  broken.rows = {{0.0, 1.0}};
  CHECK_THROWS_AS(write_csv(broken, (dir / "broken.csv").string()),
                  std::invalid_argument);

  CHECK_THROWS_AS(write_csv(record, "/nonexistent_dir/x.csv"), std::runtime_error);
}

TEST_CASE("json output round trips exactly and declares the snapshot layout") {
  const auto dir = std::filesystem::temp_directory_path() / "unravel_test_json";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.json").string();

  ResultRecord record;
  record.run_id = "test-0002";
  record.config_echo = "grid.n_points = 2\n";
  record.columns = {"time", "value"};
  record.rows = {{0.0, 0.1}, {0.5, 1.0 / 7.0}};
  Matrix snap(2, 2);
  snap << Complex(1.0, 0.0), Complex(0.25, -0.5), Complex(0.25, 0.5), Complex(0.0, 0.0);
  record.snapshot_times = {0.5};
  record.snapshots = {snap};
  write_json(record, path);

  const nlohmann::json doc = nlohmann::json::parse(slurp(path));
  CHECK(doc["run_id"] == "test-0002");
  CHECK(doc["columns"].size() == 2);
  CHECK(doc["data"]["value"][1].get<double>() == 1.0 / 7.0);
  CHECK(doc["snapshots"][0]["n"] == 2);
  CHECK(doc["snapshots"][0]["layout"] == "row-major re,im pairs");
  const auto entries = doc["snapshots"][0]["entries"].get<std::vector<double>>();
  REQUIRE(entries.size() == 8);
  CHECK(entries[2] == 0.25);   // (0,1).re
  CHECK(entries[3] == -0.5);   // (0,1).im
  CHECK(entries[4] == 0.25);   // (1,0).re
  CHECK(entries[5] == 0.5);    // (1,0).im
}

TEST_CASE("run ids are stable in the config and seed") {
  const std::string id1 = make_run_id("ensemble", "a = 1\n", 7);
  const std::string id2 = make_run_id("ensemble", "a = 1\n", 7);
  const std::string id3 = make_run_id("ensemble", "a = 1\n", 8);
  const std::string id4 = make_run_id("ensemble", "a = 2\n", 7);
  CHECK(id1 == id2);
  CHECK(id1 != id3);
  CHECK(id1 != id4);
}
