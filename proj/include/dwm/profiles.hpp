#pragma once

#include "dwm/types.hpp"

namespace dwm {

// Analytic one-parameter profile families with hand-coded exact derivatives.
// The evolution, curvature assembly, and identity checks never differentiate
// profiles numerically; finite differencing of these closed forms appears only
// inside test oracles.
enum class ProfileFamily { constant, exponential, power, oscillating };

struct Profile {
  ProfileFamily family = ProfileFamily::constant;
  real c = 1.0;   // overall scale
  real p1 = 1.0;  // lambda (exp), exponent p (power), amplitude mu (osc)
  real p2 = 1.0;  // frequency omega (osc)

  real value(real t) const;
  real d1(real t) const;
  real d2(real t) const;

  static Profile constant(real v) { return {ProfileFamily::constant, v, 0.0, 0.0}; }
  static Profile exponential(real lambda, real scale = 1.0) {
    return {ProfileFamily::exponential, scale, lambda, 0.0};
  }
  static Profile power(real p, real scale = 1.0) {
    return {ProfileFamily::power, scale, p, 0.0};
  }
  // c * (1 + mu * sin(omega t)); requires |mu| < 1 so the profile stays positive
  static Profile oscillating(real mu, real omega = 1.0, real scale = 1.0) {
    return {ProfileFamily::oscillating, scale, mu, omega};
  }
};

enum class LapseFamily { one, cosine };

// Lapse N(t,x); the menu is time independent but the time-derivative slot is
// kept so the (n-2) dtN/N terms of the evolution system stay written out.
struct Lapse {
  LapseFamily family = LapseFamily::one;
  real beta = 0.0;  // N = 1 + beta*cos(x^1), |beta| < 1

  real value(const real* x) const;
  real dx(int i, const real* x) const;
  real dt(const real*) const { return 0.0; }
  bool trivial() const { return family == LapseFamily::one; }

  static Lapse one() { return {LapseFamily::one, 0.0}; }
  static Lapse cosine(real beta) { return {LapseFamily::cosine, beta}; }
};

}  // namespace dwm
