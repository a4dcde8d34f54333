#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgdlab::cli {

enum class VerifyLevel { kQuick, kFull };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  std::optional<double> time_limit;  // seconds, when the criterion states one
};

/// Runs one acceptance criterion (1..10).
CriterionResult run_criterion(int id, unsigned threads = 1);

/// quick: criteria 1, 3, 7, 8, 10; full: all ten. Each result is printed
/// to `out` as soon as it finishes when `out` is non-null.
std::vector<CriterionResult> run_acceptance(VerifyLevel level, unsigned threads,
                                            std::ostream* out);

std::string format_result(const CriterionResult& result);

}  // namespace sgdlab::cli
