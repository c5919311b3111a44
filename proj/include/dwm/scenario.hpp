#pragma once

#include <string>
#include <vector>

#include "dwm/config.hpp"
#include "dwm/energy.hpp"

namespace dwm {

// What a finished (or aborted) run reports back; mirrored into summary.json.
struct ScenarioOutcome {
  int exit_code = 0;          // 0 completed, 2 aborted (NaN / chart exit)
  std::string verdict;        // gronwall verdict, or "aborted"
  std::string abort_reason;   // empty unless aborted
  real t_last = 0.0;          // last completed time
  real c_hat = 0.0;
  real phi_total = 0.0;
  real max_ratio = 0.0;
  real max_chart_radius = 0.0;
  real f_initial = 0.0;
  real f_final = 0.0;
  real wall_seconds = 0.0;
  long long steps = 0;
};

// Evolve one scenario and write series.csv + summary.json under cfg.output_path.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg);

// Run many configs concurrently (worker count capped by the WAVEMAP_THREADS
// environment variable); returns the maximum exit code.
int run_sweep(const std::vector<std::string>& config_paths);

}  // namespace dwm
