#pragma once
// small shared helpers for the unit suites
#include <cmath>
#include <random>

#include "dwm/types.hpp"

namespace dwmtest {

using dwm::real;

inline real rel(real got, real want) {
  return std::abs(got - want) / std::max(std::abs(want), real(1e-300));
}

// relative against a supplied scale (for quantities legitimately near zero)
inline real scaled_err(real got, real want, real scale) {
  return std::abs(got - want) / std::max(scale, real(1e-300));
}

struct Rng {
  std::mt19937_64 g;
  explicit Rng(unsigned long long seed) : g(seed) {}
  real u01() { return static_cast<real>(g() >> 11) * 0x1.0p-53; }
  real sym() { return 2.0 * u01() - 1.0; }
};

}  // namespace dwmtest
