#include "dwm/profiles.hpp"

#include <cmath>

namespace dwm {

real Profile::value(real t) const {
  switch (family) {
    case ProfileFamily::constant: return c;
    case ProfileFamily::exponential: return c * std::exp(p1 * t);
    case ProfileFamily::power: return c * std::pow(1.0 + t, p1);
    case ProfileFamily::oscillating: return c * (1.0 + p1 * std::sin(p2 * t));
  }
  return c;
}

real Profile::d1(real t) const {
  switch (family) {
    case ProfileFamily::constant: return 0.0;
    case ProfileFamily::exponential: return c * p1 * std::exp(p1 * t);
    case ProfileFamily::power: return c * p1 * std::pow(1.0 + t, p1 - 1.0);
    case ProfileFamily::oscillating: return c * p1 * p2 * std::cos(p2 * t);
  }
  return 0.0;
}

real Profile::d2(real t) const {
  switch (family) {
    case ProfileFamily::constant: return 0.0;
    case ProfileFamily::exponential: return c * p1 * p1 * std::exp(p1 * t);
    case ProfileFamily::power: return c * p1 * (p1 - 1.0) * std::pow(1.0 + t, p1 - 2.0);
    case ProfileFamily::oscillating: return -c * p1 * p2 * p2 * std::sin(p2 * t);
  }
  return 0.0;
}

real Lapse::value(const real* x) const {
  if (family == LapseFamily::one) return 1.0;
  return 1.0 + beta * std::cos(x[0]);
}

real Lapse::dx(int i, const real* x) const {
  if (family == LapseFamily::one || i != 0) return 0.0;
  return -beta * std::sin(x[0]);
}

}  // namespace dwm
