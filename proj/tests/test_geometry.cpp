#include "dwm/geometry.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace dwm;
using dwmtest::rel;
using dwmtest::scaled_err;

namespace {

WarpedSpacetime sample_background() {
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::exponential(0.7, 1.3);
  st.a = Profile::oscillating(0.3, 1.1, 0.9);
  st.horizon = 2.0;
  st.validate();
  return st;
}

// centered difference of a profile value, oracle side only
real fd1(const Profile& p, real t, real del) {
  return (p.value(t + del) - p.value(t - del)) / (2.0 * del);
}

}  // namespace

TEST_CASE("christoffel blocks match finite differences of the profiles") {
  const WarpedSpacetime st = sample_background();
  for (real t : {0.15, 0.6, 1.4}) {
    const real del = 1e-5;
    const real s = st.s.value(t), a = st.a.value(t);
    const real sd = fd1(st.s, t, del), ad = fd1(st.a, t, del);
    const ChristoffelData cd = christoffels(st, t);
    CHECK(rel(cd.g000, -sd / s) < 1e-7);
    CHECK(rel(cd.g0ij, s * s * a * ad) < 1e-7);
    CHECK(rel(cd.gji0, ad / a) < 1e-7);
  }
}

TEST_CASE("christoffels_dt matches centered differencing of christoffels") {
  const WarpedSpacetime st = sample_background();
  const real t = 0.8, del = 1e-4;
  const ChristoffelData hi = christoffels(st, t + del), lo = christoffels(st, t - del);
  const ChristoffelData dt = christoffels_dt(st, t);
  CHECK(scaled_err(dt.g000, (hi.g000 - lo.g000) / (2 * del), std::abs(dt.g000) + 1.0) < 1e-6);
  CHECK(scaled_err(dt.g0ij, (hi.g0ij - lo.g0ij) / (2 * del), std::abs(dt.g0ij) + 1.0) < 1e-6);
  CHECK(scaled_err(dt.gji0, (hi.gji0 - lo.gji0) / (2 * del), std::abs(dt.gji0) + 1.0) < 1e-6);
}

TEST_CASE("christoffel_array carries exactly the three blocks") {
  const WarpedSpacetime st = sample_background();
  const real t = 0.45;
  const ChristoffelData cd = christoffels(st, t);
  real G[3][3][3];
  christoffel_array(st, t, G);
  const int n = st.n;
  for (int r = 0; r < n; ++r)
    for (int mu = 0; mu < n; ++mu)
      for (int nu = 0; nu < n; ++nu) {
        real want = 0.0;
        if (r == 0 && mu == 0 && nu == 0) want = cd.g000;
        else if (r == 0 && mu > 0 && mu == nu) want = cd.g0ij;
        else if (r > 0 && ((mu == r && nu == 0) || (mu == 0 && nu == r))) want = cd.gji0;
        CHECK(std::abs(G[r][mu][nu] - want) < 1e-14);
      }
}

TEST_CASE("coordinate riemann matches brute force from the christoffel array") {
  const WarpedSpacetime st = sample_background();
  const real t = 0.7, del = 1e-4;
  const int n = st.n;
  real G[3][3][3], Gp[3][3][3], Gm[3][3][3];
  christoffel_array(st, t, G);
  christoffel_array(st, t + del, Gp);
  christoffel_array(st, t - del, Gm);
  const CurvatureData cv = curvature(st, t);

  real scale = 0.0;
  for (int r = 0; r < n; ++r)
    for (int s_ = 0; s_ < n; ++s_)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu)
          scale = std::max(scale, std::abs(cv.riem[r][s_][mu][nu]));
  REQUIRE(scale > 0.0);

  for (int r = 0; r < n; ++r)
    for (int s_ = 0; s_ < n; ++s_)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          real v = 0.0;
          if (mu == 0) v += (Gp[r][nu][s_] - Gm[r][nu][s_]) / (2 * del);
          if (nu == 0) v -= (Gp[r][mu][s_] - Gm[r][mu][s_]) / (2 * del);
          for (int l = 0; l < n; ++l)
            v += G[r][mu][l] * G[l][nu][s_] - G[r][nu][l] * G[l][mu][s_];
          CHECK(scaled_err(cv.riem[r][s_][mu][nu], v, scale) < 1e-6);
        }

  // scalar curvature by direct double contraction of the same brute-force tensor
  const real s = st.s.value(t), a = st.a.value(t);
  real scal = 0.0;
  for (int s_ = 0; s_ < n; ++s_) {
    real ric = 0.0;
    for (int r = 0; r < n; ++r) ric += cv.riem[r][s_][r][s_];
    scal += (s_ == 0 ? -s * s : 1.0 / (a * a)) * ric;
  }
  CHECK(rel(cv.scal, scal) < 1e-10);
}

TEST_CASE("scalar curvature closed form") {
  // scal = 2(n-1) s (sdot adot + s addot)/a + (n-1)(n-2) s^2 adot^2/a^2
  for (int n : {2, 3}) {
    WarpedSpacetime st;
    st.n = n;
    st.s = Profile::constant(1.4);
    st.a = Profile::oscillating(0.25, 1.3, 1.1);
    st.horizon = 2.0;
    const real t = 0.9;
    const real s = st.s.value(t), sd = st.s.d1(t);
    const real a = st.a.value(t), ad = st.a.d1(t), add = st.a.d2(t);
    const real want = 2.0 * (n - 1) * s * (sd * ad + s * add) / a +
                      real(n - 1) * real(n - 2) * s * s * ad * ad / (a * a);
    CHECK(rel(curvature(st, t).scal, want) < 1e-12);
  }
}

TEST_CASE("exponential s with constant a is flat in disguise") {
  // -e^{-2t} dt^2 + delta is Minkowski after u = -e^{-t}; all of riem vanishes
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::exponential(1.0);
  st.a = Profile::constant(1.0);
  const CurvatureData cv = curvature(st, 0.8);
  for (int r = 0; r < 3; ++r)
    for (int s_ = 0; s_ < 3; ++s_)
      for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) CHECK(std::abs(cv.riem[r][s_][mu][nu]) < 1e-13);
  CHECK(std::abs(cv.scal) < 1e-13);
}

TEST_CASE("lowered riemann has the pair symmetries") {
  const WarpedSpacetime st = sample_background();
  const real t = 1.1;
  const int n = st.n;
  const CurvatureData cv = curvature(st, t);
  const real s = st.s.value(t), a = st.a.value(t);
  auto hmet = [&](int mu) { return mu == 0 ? -1.0 / (s * s) : a * a; };
  real low[3][3][3][3] = {};
  real scale = 0.0;
  for (int r = 0; r < n; ++r)
    for (int s_ = 0; s_ < n; ++s_)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          low[r][s_][mu][nu] = hmet(r) * cv.riem[r][s_][mu][nu];
          scale = std::max(scale, std::abs(low[r][s_][mu][nu]));
        }
  for (int a_ = 0; a_ < n; ++a_)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          CHECK(scaled_err(low[a_][b][c][d], -low[a_][b][d][c], scale) < 1e-12);
          CHECK(scaled_err(low[a_][b][c][d], -low[b][a_][c][d], scale) < 1e-12);
          CHECK(scaled_err(low[a_][b][c][d], low[c][d][a_][b], scale) < 1e-12);
          const real bianchi = low[a_][b][c][d] + low[a_][c][d][b] + low[a_][d][b][c];
          CHECK(std::abs(bianchi) / std::max(scale, 1e-300) < 1e-12);
        }
}

TEST_CASE("second fundamental form coefficient is -s a adot") {
  const WarpedSpacetime st = sample_background();
  const real t = 0.55, del = 1e-5;
  const real want = -st.s.value(t) * st.a.value(t) * fd1(st.a, t, del);
  CHECK(rel(second_fundamental_form(st, t), want) < 1e-7);
}

TEST_CASE("decay_rate_f against finite differences; n=2 kills it exactly") {
  WarpedSpacetime st = sample_background();
  const real t = 0.35, del = 1e-5;
  const real s = st.s.value(t), sd = fd1(st.s, t, del);
  CHECK(rel(decay_rate_f(st, t), std::pow(s, 1 - st.n) * sd) < 1e-7);
  st.n = 2;
  CHECK(decay_rate_f(st, t) == 0.0);
  CHECK(decay_rate_f(st, 1.7) == 0.0);
}

TEST_CASE("horizon integrals: exponential closed form") {
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::exponential(1.0, 1.0);
  st.a = Profile::constant(1.0);
  const real T = 3.0;
  st.horizon = T;
  const ConformalIntegrals ci = conformal_factor_integrals(st, T);
  const real sinv = 1.0 - std::exp(-T);       // int e^{-t}
  const real fint = 1.0 - std::exp(-T);       // int s^{-2} sdot = 1/s(0) - 1/s(T)
  CHECK(rel(ci.sinv_integral, sinv) < 1e-9);
  CHECK(rel(ci.f_integral, fint) < 1e-9);
  CHECK(rel(ci.phi, sinv + fint) < 1e-9);
  CHECK_FALSE(ci.sinv_divergent);
}

TEST_CASE("horizon integrals: power p=2 closed form") {
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::power(2.0, 1.0);  // (1+t)^2
  st.a = Profile::constant(1.0);
  const real T = 4.0;
  st.horizon = T;
  const ConformalIntegrals ci = conformal_factor_integrals(st, T);
  const real sinv = 1.0 - 1.0 / (1.0 + T);
  const real fint = 1.0 - 1.0 / ((1.0 + T) * (1.0 + T));
  CHECK(rel(ci.sinv_integral, sinv) < 1e-9);
  CHECK(rel(ci.f_integral, fint) < 1e-9);
  CHECK_FALSE(ci.sinv_divergent);
}

TEST_CASE("constant s is flagged divergent and Phi is linear") {
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::constant(1.0);
  st.a = Profile::constant(1.0);
  const real T = 10.0;
  st.horizon = T;
  const ConformalIntegrals ci = conformal_factor_integrals(st, T);
  CHECK(ci.sinv_divergent);
  CHECK(rel(ci.sinv_integral, T) < 1e-10);
  CHECK(ci.f_integral == 0.0);  // sdot = 0
  CHECK(rel(ci.phi, T) < 1e-10);
}

TEST_CASE("phi increments are additive") {
  const WarpedSpacetime st = sample_background();
  const real whole = conformal_phi_between(st, 0.0, 1.8);
  const real split = conformal_phi_between(st, 0.0, 0.7) + conformal_phi_between(st, 0.7, 1.8);
  CHECK(rel(whole, split) < 1e-9);
}

TEST_CASE("n=2 makes the f part of Phi vanish identically") {
  WarpedSpacetime st;
  st.n = 2;
  st.s = Profile::exponential(0.5, 1.2);
  st.a = Profile::constant(1.0);
  st.horizon = 2.0;
  const ConformalIntegrals ci = conformal_factor_integrals(st, 2.0);
  CHECK(ci.f_integral == 0.0);
  CHECK(rel(ci.phi, ci.sinv_integral) < 1e-12);
}

TEST_CASE("validate rejects shrinking or nonpositive profiles") {
  WarpedSpacetime st;
  st.n = 3;
  st.horizon = 2.0;
  st.s = Profile::exponential(-0.5);  // decreasing
  CHECK_THROWS_AS(st.validate(), ConfigError);
  st.s = Profile::constant(-1.0);
  CHECK_THROWS_AS(st.validate(), ConfigError);
  st.s = Profile::constant(1.0);
  st.a = Profile::oscillating(1.5, 1.0, 1.0);  // |mu| >= 1
  CHECK_THROWS_AS(st.validate(), ConfigError);
}
