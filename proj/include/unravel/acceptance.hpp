#pragma once

#include <string>
#include <vector>

namespace unravel {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AcceptanceOptions {
  int threads = 0;          // 0 = hardware concurrency
  std::string cli_path;     // binary to spawn for the byte-identical check;
                            // empty falls back to an in-process double run
  std::string work_dir = ".";
};

/// Runs the full acceptance suite at its pinned parameters and tolerances.
/// Each criterion yields one result; none aborts the others.
std::vector<CriterionResult> run_acceptance_suite(const AcceptanceOptions& options);

/// Formats one "PASS"/"FAIL" line per criterion.
std::string format_criterion_line(const CriterionResult& result);

}  // namespace unravel
