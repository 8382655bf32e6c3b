#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace obslab {

inline constexpr const char* kVersion = "0.1.0";

/// Per-run options (CLI flags / C API options JSON).
struct RunOptions {
  int m0_lo = 1;
  int m0_hi = 0;  // 0 -> command default
  int bins = 72;
  std::optional<ScalingTag> scaling;  // override of the scenario tag
  double tol = 1e-8;
  std::vector<int> truncations;
  std::vector<std::vector<double>> theta_families;
  std::vector<int> family_modes;
};

RunOptions parse_options(const std::string& options_json);

struct RunResult {
  std::string report_json;  // deterministic serialization
  std::vector<std::pair<std::string, std::string>> csvs;  // (name, contents)
};

/// Commands: modes, solve, symbols, gramian, obsconst, sweep, simul, super,
/// kernel, hmeasure. Unknown commands and bad inputs raise validation errors.
RunResult dispatch(const std::string& command, const Scenario& scenario,
                   const RunOptions& options);

/// Concurrency cap from OBSLAB_THREADS (>= 1).
int thread_cap();

}  // namespace obslab
