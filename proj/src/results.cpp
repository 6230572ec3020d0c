#include "unravel/results.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace unravel {

uint64_t fnv1a64(const std::string& text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string make_run_id(const std::string& subcommand, const std::string& config_echo,
                        uint64_t seed) {
  const uint64_t h = fnv1a64(config_echo + "\nseed=" + std::to_string(seed));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return subcommand + "-" + buf;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_record(const ResultRecord& record) {
  for (const auto& row : record.rows) {
    if (row.size() != record.columns.size()) {
      throw std::invalid_argument("ResultRecord: row width does not match columns");
    }
  }
  if (record.snapshots.size() != record.snapshot_times.size()) {
    throw std::invalid_argument("ResultRecord: snapshot times/matrices length mismatch");
  }
}

}  // namespace

void write_csv(const ResultRecord& record, const std::string& path) {
  check_record(record);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  }
  out << "# run_id = " << record.run_id << "\n";
  std::istringstream echo(record.config_echo);
  std::string line;
  while (std::getline(echo, line)) {
    out << "# " << line << "\n";
  }
  for (size_t c = 0; c < record.columns.size(); ++c) {
    out << (c ? "," : "") << record.columns[c];
  }
  out << "\n";
  for (const auto& row : record.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << fmt(row[c]);
    }
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("write_csv: write failed for '" + path + "'");
  }
}

void write_json(const ResultRecord& record, const std::string& path) {
  check_record(record);
  nlohmann::json doc;
  doc["run_id"] = record.run_id;
  doc["config"] = record.config_echo;
  doc["columns"] = record.columns;
  nlohmann::json data = nlohmann::json::object();
  for (size_t c = 0; c < record.columns.size(); ++c) {
    std::vector<double> column;
    column.reserve(record.rows.size());
    for (const auto& row : record.rows) column.push_back(row[c]);
    data[record.columns[c]] = column;
  }
  doc["data"] = data;
  if (!record.snapshots.empty()) {
    nlohmann::json snaps = nlohmann::json::array();
    for (size_t i = 0; i < record.snapshots.size(); ++i) {
      const Matrix& m = record.snapshots[i];
      std::vector<double> flat;
      flat.reserve(static_cast<size_t>(2 * m.size()));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          flat.push_back(m(r, c).real());
          flat.push_back(m(r, c).imag());
        }
      }
      nlohmann::json snap;
      snap["time"] = record.snapshot_times[i];
      snap["n"] = m.rows();
      snap["layout"] = "row-major re,im pairs";
      snap["entries"] = flat;
      snaps.push_back(std::move(snap));
    }
    doc["snapshots"] = std::move(snaps);
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_json: cannot open '" + path + "' for writing");
  }
  out << doc.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("write_json: write failed for '" + path + "'");
  }
}

}  // namespace unravel
