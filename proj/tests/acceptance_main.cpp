// Runs every acceptance criterion at its pinned parameters and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "unravel/acceptance.hpp"

#ifndef UNRAVEL_CLI_PATH
#define UNRAVEL_CLI_PATH ""
#endif

int main() {
  unravel::AcceptanceOptions options;
  options.threads = 0;
  options.cli_path = UNRAVEL_CLI_PATH;
  options.work_dir = "acceptance_work";
  std::filesystem::create_directories(options.work_dir);

  const auto results = unravel::run_acceptance_suite(options);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << unravel::format_criterion_line(r) << std::endl;
    if (!r.passed) ++failures;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT")
            << " (" << results.size() - failures << "/" << results.size() << ")"
            << std::endl;
  return failures;
}
