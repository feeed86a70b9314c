#pragma once

#include <string>
#include <vector>

namespace kschemo {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Suites: "operators", "reactions", "conservation".
/// Throws std::invalid_argument for an unknown suite.
std::vector<CheckResult> run_check_suite(const std::string& suite);

const std::vector<std::string>& check_suite_names();

}  // namespace kschemo
