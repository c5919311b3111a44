#pragma once

#include <functional>

#include "dwm/types.hpp"

namespace dwm {

// Adaptive Simpson quadrature with an absolute tolerance target.
real adaptive_simpson(const std::function<real(real)>& f, real a, real b, real abs_tol);

}  // namespace dwm
