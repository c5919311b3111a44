#pragma once

#include <string>

#include "dwm/dynamics.hpp"

namespace dwm {

// One scenario: model + initial-data parameters + run/output controls.
// Parsed from a flat `key = value` file; every key has a documented default.
struct ScenarioConfig {
  Model model;
  InitParams init;
  real t_end = 10.0;
  real cfl = 0.4;
  real dt_max = 0.05;
  std::string output_path = "out";
  int stride = 5;
  std::string name = "scenario";
};

// Parse the text of a config file.  `#` starts a comment, blank lines are
// skipped, unknown keys are rejected.  Throws ConfigError with the offending
// line number on parse errors and with the key name on range violations.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

}  // namespace dwm
