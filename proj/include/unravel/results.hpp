#pragma once

#include <string>
#include <vector>

#include "unravel/types.hpp"

namespace unravel {

/// Flat time-series record emitted by every subcommand: named scalar
/// columns plus optional covariance snapshots. The embedded config echo is
/// sufficient to reproduce the run exactly.
struct ResultRecord {
  std::string run_id;
  std::string config_echo;
  std::vector<std::string> columns;       // first column is always "time"
  std::vector<std::vector<double>> rows;  // one row per time stamp
  std::vector<double> snapshot_times;
  std::vector<Matrix> snapshots;          // covariance matrices
};

/// FNV-1a over the echo and a salt; used to derive stable run identifiers.
uint64_t fnv1a64(const std::string& text);

std::string make_run_id(const std::string& subcommand, const std::string& config_echo,
                        uint64_t seed);

/// Comment header with the config echo, one header row of column names,
/// then one row per stamp with 17 significant digits.
void write_csv(const ResultRecord& record, const std::string& path);

/// Single JSON document with config echo, column arrays, and covariance
/// snapshots flattened to row-major [re, im] pairs.
void write_json(const ResultRecord& record, const std::string& path);

}  // namespace unravel
