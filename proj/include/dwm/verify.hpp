#pragma once

#include <limits>
#include <string>
#include <vector>

#include "dwm/types.hpp"

namespace dwm {

// One row of the identity battery.  `value` is the residual at the finest
// resolution tried (or the detection ratio for ablation/mutation rows),
// `slope` the observed refinement order, NaN when the case is algebraically
// exact and no refinement is run.
struct CheckResult {
  std::string name;
  real value = 0.0;
  real slope = std::numeric_limits<real>::quiet_NaN();
  real tol = 0.0;
  bool pass = false;
  std::string detail;
};

// Randomized numerical certification of the structural identities the
// evolution system relies on; deterministic per seed, independent of any
// integrator state.
std::vector<CheckResult> run_battery(unsigned long long seed);

}  // namespace dwm
