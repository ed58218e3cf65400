#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ecoevo {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240501;
  std::filesystem::path scenario_dir;  ///< empty uses the bundled scenarios
  /// Multiplies the kernel variance used by the operator under test (1 = untouched).
  double kernel_variance_scale = 1.0;
  /// Restrict to these ids; empty runs everything.
  std::vector<int> only;
};

struct CriterionInfo {
  int id;
  const char* name;
  double time_limit;
};

const std::vector<CriterionInfo>& list_criteria();

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One line per criterion plus a total.
std::string format_results(const std::vector<CriterionResult>& results);

}  // namespace ecoevo
