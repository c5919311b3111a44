#include "dwm/geometry.hpp"

#include <cmath>
#include <cstring>

#include "dwm/quadrature.hpp"

namespace dwm {

void WarpedSpacetime::validate() const {
  if (n != 2 && n != 3) throw ConfigError("spacetime dimension must be 2 or 3");
  if (horizon <= 0.0) throw ConfigError("horizon must be positive");
  // sdot >= 0 and s > 0 on the horizon; the families are monotone so endpoint checks suffice
  const real probes[] = {0.0, 0.5 * horizon, horizon};
  for (real t : probes) {
    if (s.value(t) <= 0.0) throw ConfigError("scale profile s must stay positive");
    if (s.d1(t) < 0.0) throw ConfigError("scale profile s must be nondecreasing");
    if (a.value(t) <= 0.0) throw ConfigError("slice profile a must stay positive");
  }
  if (a.family == ProfileFamily::oscillating && std::abs(a.p1) >= 1.0)
    throw ConfigError("oscillating a requires |mu| < 1");
  if (N.family == LapseFamily::cosine && std::abs(N.beta) >= 1.0)
    throw ConfigError("cosine lapse requires |beta| < 1");
}

ChristoffelData christoffels(const WarpedSpacetime& st, real t) {
  const real s = st.s.value(t), ds = st.s.d1(t);
  const real a = st.a.value(t), da = st.a.d1(t);
  ChristoffelData c;
  c.g000 = -ds / s;
  c.g0ij = s * s * a * da;
  c.gji0 = da / a;
  return c;
}

ChristoffelData christoffels_dt(const WarpedSpacetime& st, real t) {
  const real s = st.s.value(t), ds = st.s.d1(t), dds = st.s.d2(t);
  const real a = st.a.value(t), da = st.a.d1(t), dda = st.a.d2(t);
  ChristoffelData c;
  c.g000 = -dds / s + (ds / s) * (ds / s);
  c.g0ij = 2.0 * s * ds * a * da + s * s * (da * da + a * dda);
  c.gji0 = dda / a - (da / a) * (da / a);
  return c;
}

real second_fundamental_form(const WarpedSpacetime& st, real t) {
  // gdot_ij = 2 a adot delta_ij, so II_ij = -(s/2) gdot_ij = -s a adot delta_ij
  return -st.s.value(t) * st.a.value(t) * st.a.d1(t);
}

void christoffel_array(const WarpedSpacetime& st, real t, real G[3][3][3]) {
  std::memset(G, 0, sizeof(real) * 27);
  const ChristoffelData c = christoffels(st, t);
  const int d = st.spatial_dim();
  G[0][0][0] = c.g000;
  for (int i = 1; i <= d; ++i) {
    G[0][i][i] = c.g0ij;
    G[i][i][0] = c.gji0;
    G[i][0][i] = c.gji0;
  }
}

void christoffel_array_dt(const WarpedSpacetime& st, real t, real G[3][3][3]) {
  std::memset(G, 0, sizeof(real) * 27);
  const ChristoffelData c = christoffels_dt(st, t);
  const int d = st.spatial_dim();
  G[0][0][0] = c.g000;
  for (int i = 1; i <= d; ++i) {
    G[0][i][i] = c.g0ij;
    G[i][i][0] = c.gji0;
    G[i][0][i] = c.gji0;
  }
}

CurvatureData curvature(const WarpedSpacetime& st, real t) {
  CurvatureData out;
  out.n = st.n;
  const int n = st.n;
  real G[3][3][3], Gdot[3][3][3];
  christoffel_array(st, t, G);
  christoffel_array_dt(st, t, Gdot);

  // R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma} - d_nu Gamma^rho_{mu sigma}
  //                     + Gamma^rho_{mu l} Gamma^l_{nu sigma} - Gamma^rho_{nu l} Gamma^l_{mu sigma};
  // the blocks depend only on t, so the derivative terms contribute only for mu or nu = 0.
  for (int r = 0; r < n; ++r)
    for (int s_ = 0; s_ < n; ++s_)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          real v = 0.0;
          if (mu == 0) v += Gdot[r][nu][s_];
          if (nu == 0) v -= Gdot[r][mu][s_];
          for (int l = 0; l < n; ++l)
            v += G[r][mu][l] * G[l][nu][s_] - G[r][nu][l] * G[l][mu][s_];
          out.riem[r][s_][mu][nu] = v;
        }

  const real s = st.s.value(t), a = st.a.value(t);
  const real hinv00 = -s * s, hinvii = 1.0 / (a * a);
  real scal = 0.0;
  for (int s_ = 0; s_ < n; ++s_)
    for (int nu = 0; nu < n; ++nu) {
      real ric = 0.0;
      for (int r = 0; r < n; ++r) ric += out.riem[r][s_][r][nu];
      const real hinv = (s_ == nu) ? (s_ == 0 ? hinv00 : hinvii) : 0.0;
      scal += hinv * ric;
    }
  out.scal = scal;
  return out;
}

real decay_rate_f(const WarpedSpacetime& st, real t) {
  return (st.n - 2) * std::pow(st.s.value(t), 1 - st.n) * st.s.d1(t);
}

real conformal_phi_between(const WarpedSpacetime& st, real t0, real t1) {
  if (t1 <= t0) return 0.0;
  auto rate = [&](real t) { return 1.0 / st.s.value(t) + decay_rate_f(st, t); };
  return adaptive_simpson(rate, t0, t1, 1e-12);
}

ConformalIntegrals conformal_factor_integrals(const WarpedSpacetime& st, real T) {
  ConformalIntegrals out;
  const real tol = 1e-10;
  auto sinv = [&](real t) { return 1.0 / st.s.value(t); };
  auto f = [&](real t) { return decay_rate_f(st, t); };
  out.sinv_integral = adaptive_simpson(sinv, 0.0, T, tol);
  out.f_integral = adaptive_simpson(f, 0.0, T, tol);
  out.phi = out.sinv_integral + out.f_integral;
  // convergence heuristic for int_0^inf s^{-1}: p-test on the decay exponent
  // q = t sdot/s at a probe time well past the run (profiles are closed-form,
  // so looking beyond the horizon is legitimate).  q stays at p for power
  // profiles, grows without bound for exponentials, and is 0 for constants;
  // the integral converges when the exponent of 1/s exceeds 1.
  real tp = std::max(T, 100.0);
  while (tp > 1.0 &&
         !(std::isfinite(st.s.value(tp)) && std::isfinite(st.s.d1(tp))))
    tp *= 0.5;
  const real q = tp * st.s.d1(tp) / st.s.value(tp);
  out.sinv_divergent = !(q > 1.05);
  return out;
}

}  // namespace dwm
