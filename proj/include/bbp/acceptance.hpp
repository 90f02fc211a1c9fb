#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bbp {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  /// Only criteria whose scenarios have N_max <= 20.
  bool fast = false;
  /// Called after each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs the built-in acceptance suite, criteria 1..8.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// "PASS [3] higher-moment scaling (12.3 s): ..."
std::string format_result(const CriterionResult& result);

}  // namespace bbp
