#include "dwm/quadrature.hpp"

#include <cmath>

namespace dwm {

namespace {

real simpson(real fa, real fm, real fb, real h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

real recurse(const std::function<real(real)>& f, real a, real b, real fa, real fm, real fb,
             real whole, real tol, int depth) {
  const real m = 0.5 * (a + b);
  const real lm = 0.5 * (a + m);
  const real rm = 0.5 * (m + b);
  const real flm = f(lm);
  const real frm = f(rm);
  const real left = simpson(fa, flm, fm, m - a);
  const real right = simpson(fm, frm, fb, b - m);
  const real delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

real adaptive_simpson(const std::function<real(real)>& f, real a, real b, real abs_tol) {
  if (a == b) return 0.0;
  const real fa = f(a);
  const real m = 0.5 * (a + b);
  const real fm = f(m);
  const real fb = f(b);
  const real whole = simpson(fa, fm, fb, b - a);
  return recurse(f, a, b, fa, fm, fb, whole, abs_tol, 48);
}

}  // namespace dwm
