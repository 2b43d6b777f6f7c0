#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace secvar::cli {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;  // measured values against their tolerances
  double seconds = 0.0;
};

/// Runs the ten acceptance checks at their stated tolerances, writing one
/// PASS/FAIL line per check to `progress` as each finishes.
std::vector<CriterionResult> run_acceptance(std::ostream& progress);

[[nodiscard]] std::string format_result(const CriterionResult& r);

}  // namespace secvar::cli
