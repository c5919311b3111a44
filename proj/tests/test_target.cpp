#include "dwm/target.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "dwm/spin.hpp"
#include "helpers.hpp"

using namespace dwm;
using dwmtest::rel;
using dwmtest::Rng;
using dwmtest::scaled_err;

namespace {

TargetChart sphere_chart() {
  TargetChart c;
  c.kind = TargetKind::sphere_stereographic;
  return c;
}
TargetChart flat_chart(int m = 2) {
  TargetChart c;
  c.kind = TargetKind::flat;
  c.m = m;
  return c;
}
TargetChart sinh_chart() {
  TargetChart c;
  c.kind = TargetKind::warped_surface;
  c.warp = WarpFamily::sinh_r;
  return c;
}
TargetChart cubic_chart() {
  TargetChart c;
  c.kind = TargetKind::warped_surface;
  c.warp = WarpFamily::cubic;
  c.warp_c3 = 0.4;
  return c;
}

TVec sample_point(const TargetChart& c, Rng& rng) {
  TVec y{};
  if (c.kind == TargetKind::warped_surface) {
    y[0] = 0.8 + 1.2 * rng.u01();
    y[1] = 2.0 * rng.sym();
  } else {
    for (int i = 0; i < c.m; ++i) y[i] = 0.8 * rng.sym();
  }
  REQUIRE(c.admissible(y.data()));
  return y;
}

// oracle Christoffels from centered differencing of the chart metric
void fd_christoffel(const TargetChart& c, const real* y, real Gam[3][3][3], real del) {
  const int m = c.m;
  real Gi[3][3], dG[3][3][3];  // dG[J][L][K] = d_J G_LK
  c.metric_inv(y, Gi);
  for (int J = 0; J < m; ++J) {
    real yp[3] = {y[0], y[1], y[2]}, ym[3] = {y[0], y[1], y[2]};
    yp[J] += del;
    ym[J] -= del;
    real Gp[3][3], Gm[3][3];
    c.metric(yp, Gp);
    c.metric(ym, Gm);
    for (int L = 0; L < m; ++L)
      for (int K = 0; K < m; ++K) dG[J][L][K] = (Gp[L][K] - Gm[L][K]) / (2 * del);
  }
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) Gam[I][J][K] = 0.0;
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int K = 0; K < m; ++K) {
        real v = 0.0;
        for (int L = 0; L < m; ++L)
          v += 0.5 * Gi[I][L] * (dG[J][L][K] + dG[K][L][J] - dG[L][J][K]);
        Gam[I][J][K] = v;
      }
}

// oracle mixed Riemann R^I_{JKL} from centered differencing of the library Christoffels
void fd_riemann_up(const TargetChart& c, const real* y, real Rup[3][3][3][3], real del) {
  const int m = c.m;
  real Gam[3][3][3], dGam[3][3][3][3];  // dGam[K][I][L][J] = d_K Gamma^I_LJ
  c.christoffel(y, Gam);
  for (int K = 0; K < m; ++K) {
    real yp[3] = {y[0], y[1], y[2]}, ym[3] = {y[0], y[1], y[2]};
    yp[K] += del;
    ym[K] -= del;
    real Gp[3][3][3], Gm[3][3][3];
    c.christoffel(yp, Gp);
    c.christoffel(ym, Gm);
    for (int I = 0; I < m; ++I)
      for (int L = 0; L < m; ++L)
        for (int J = 0; J < m; ++J) dGam[K][I][L][J] = (Gp[I][L][J] - Gm[I][L][J]) / (2 * del);
  }
  for (int I = 0; I < m; ++I)
    for (int J = 0; J < m; ++J)
      for (int K = 0; K < m; ++K)
        for (int L = 0; L < m; ++L) {
          real v = dGam[K][I][L][J] - dGam[L][I][K][J];
          for (int M = 0; M < m; ++M)
            v += Gam[I][K][M] * Gam[M][L][J] - Gam[I][L][M] * Gam[M][K][J];
          Rup[I][J][K][L] = v;
        }
}

}  // namespace

TEST_CASE("metric times inverse is the identity on every chart") {
  Rng rng(11);
  for (const TargetChart& c : {sphere_chart(), flat_chart(3), sinh_chart(), cubic_chart()}) {
    const TVec y = sample_point(c, rng);
    real G[3][3], Gi[3][3];
    c.metric(y.data(), G);
    c.metric_inv(y.data(), Gi);
    for (int i = 0; i < c.m; ++i)
      for (int j = 0; j < c.m; ++j) {
        real v = 0.0;
        for (int k = 0; k < c.m; ++k) v += G[i][k] * Gi[k][j];
        CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) < 1e-13);
      }
  }
}

TEST_CASE("christoffels match finite differences of the metric") {
  Rng rng(12);
  for (const TargetChart& c : {sphere_chart(), sinh_chart(), cubic_chart()}) {
    for (int rep = 0; rep < 3; ++rep) {
      const TVec y = sample_point(c, rng);
      real want[3][3][3], got[3][3][3];
      fd_christoffel(c, y.data(), want, 1e-5);
      c.christoffel(y.data(), got);
      real scale = 0.0;
      for (int I = 0; I < c.m; ++I)
        for (int J = 0; J < c.m; ++J)
          for (int K = 0; K < c.m; ++K) scale = std::max(scale, std::abs(want[I][J][K]));
      for (int I = 0; I < c.m; ++I)
        for (int J = 0; J < c.m; ++J)
          for (int K = 0; K < c.m; ++K)
            CHECK(scaled_err(got[I][J][K], want[I][J][K], std::max(scale, 1.0)) < 1e-6);
    }
  }
}

TEST_CASE("riemann matches brute force from the christoffels") {
  Rng rng(13);
  for (const TargetChart& c : {sphere_chart(), sinh_chart(), cubic_chart()}) {
    const TVec y = sample_point(c, rng);
    const TargetGeom tg = target_geometry(c, y.data());
    real brute[3][3][3][3];
    fd_riemann_up(c, y.data(), brute, 1e-5);
    real scale = 0.0;
    for (int I = 0; I < c.m; ++I)
      for (int J = 0; J < c.m; ++J)
        for (int K = 0; K < c.m; ++K)
          for (int L = 0; L < c.m; ++L) scale = std::max(scale, std::abs(brute[I][J][K][L]));
    REQUIRE(scale > 0.1);
    for (int I = 0; I < c.m; ++I)
      for (int J = 0; J < c.m; ++J)
        for (int K = 0; K < c.m; ++K)
          for (int L = 0; L < c.m; ++L) {
            CHECK(scaled_err(tg.Rup[I][J][K][L], brute[I][J][K][L], scale) < 2e-5);
            // lowered tensor consistent with the same index lowering
            real lowered = 0.0;
            for (int M = 0; M < c.m; ++M) lowered += tg.G[I][M] * brute[M][J][K][L];
            CHECK(scaled_err(tg.R[I][J][K][L], lowered, scale) < 2e-5);
          }
  }
}

TEST_CASE("sphere curvature is the constant-curvature tensor and R(X,Y)Y = X") {
  Rng rng(14);
  const TargetChart c = sphere_chart();
  const TVec y = sample_point(c, rng);
  const TargetGeom tg = target_geometry(c, y.data());
  for (int I = 0; I < 2; ++I)
    for (int J = 0; J < 2; ++J)
      for (int K = 0; K < 2; ++K)
        for (int L = 0; L < 2; ++L) {
          const real want = tg.G[I][K] * tg.G[J][L] - tg.G[I][L] * tg.G[J][K];
          CHECK(std::abs(tg.R[I][J][K][L] - want) < 1e-12);
        }

  // G-orthonormalize a random pair, then the curvature operator returns X
  TVec X{rng.sym(), rng.sym(), 0.0}, Y{rng.sym(), rng.sym(), 0.0};
  auto dot = [&](const TVec& u, const TVec& v) {
    real s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += tg.G[i][j] * u[i] * v[j];
    return s;
  };
  const real nx = std::sqrt(dot(X, X));
  for (auto& v : X) v /= nx;
  const real xy = dot(X, Y);
  for (int i = 0; i < 2; ++i) Y[i] -= xy * X[i];
  const real ny = std::sqrt(dot(Y, Y));
  for (auto& v : Y) v /= ny;
  const TVec RXYY = curvature_operator(tg, 2, X, Y, Y);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(RXYY[i] - X[i]) < 1e-12);
}

TEST_CASE("gauss curvature: closed forms and the R_1212/det G quotient") {
  Rng rng(15);
  {
    const TargetChart c = sphere_chart();
    const TVec y = sample_point(c, rng);
    CHECK(c.gauss_curvature(y.data()) == 1.0);
  }
  {
    const TargetChart c = sinh_chart();
    const TVec y = sample_point(c, rng);
    CHECK(rel(c.gauss_curvature(y.data()), -1.0) < 1e-13);
  }
  for (const TargetChart& c : {sphere_chart(), sinh_chart(), cubic_chart()}) {
    const TVec y = sample_point(c, rng);
    const TargetGeom tg = target_geometry(c, y.data());
    const real det = tg.G[0][0] * tg.G[1][1] - tg.G[0][1] * tg.G[1][0];
    CHECK(rel(c.gauss_curvature(y.data()), tg.R[0][1][0][1] / det) < 1e-10);
  }
}

TEST_CASE("grad_riemann matches covariant differencing of riemann_lowered") {
  Rng rng(16);
  const TargetChart c = cubic_chart();
  REQUIRE(c.has_grad_curvature());
  const TVec y = sample_point(c, rng);
  const TargetGeom tg = target_geometry(c, y.data());
  const real del = 1e-5;
  real scale = 0.0;
  for (int M = 0; M < 2; ++M)
    for (int I = 0; I < 2; ++I)
      for (int J = 0; J < 2; ++J)
        for (int K = 0; K < 2; ++K)
          for (int L = 0; L < 2; ++L)
            scale = std::max(scale, std::abs(tg.dR[M][I][J][K][L]));
  REQUIRE(scale > 0.0);
  for (int M = 0; M < 2; ++M) {
    real yp[3] = {y[0], y[1], y[2]}, ym[3] = {y[0], y[1], y[2]};
    yp[M] += del;
    ym[M] -= del;
    real Rp[3][3][3][3], Rm[3][3][3][3];
    c.riemann_lowered(yp, Rp);
    c.riemann_lowered(ym, Rm);
    for (int I = 0; I < 2; ++I)
      for (int J = 0; J < 2; ++J)
        for (int K = 0; K < 2; ++K)
          for (int L = 0; L < 2; ++L) {
            real v = (Rp[I][J][K][L] - Rm[I][J][K][L]) / (2 * del);
            for (int P = 0; P < 2; ++P) {
              v -= tg.Gam[P][M][I] * tg.R[P][J][K][L];
              v -= tg.Gam[P][M][J] * tg.R[I][P][K][L];
              v -= tg.Gam[P][M][K] * tg.R[I][J][P][L];
              v -= tg.Gam[P][M][L] * tg.R[I][J][K][P];
            }
            CHECK(scaled_err(tg.dR[M][I][J][K][L], v, scale) < 2e-5);
          }
  }
}

TEST_CASE("sharp gradient term: zero on constant-curvature charts, contraction on cubic") {
  Rng rng(17);
  // hermitian bilinear table from random spinors
  Spinor ps[2];
  for (int I = 0; I < 2; ++I)
    for (int c = 0; c < 2; ++c) ps[I][c] = cplx(rng.sym(), rng.sym());
  cplx B[3][3] = {};
  for (int J = 0; J < 2; ++J)
    for (int L = 0; L < 2; ++L) B[J][L] = pair_indef(ps[J], ps[L]);

  for (const TargetChart& c : {sphere_chart(), flat_chart(2), sinh_chart()}) {
    const TVec y = sample_point(c, rng);
    const TVec V = sharp_gradient_term(c, y.data(), B);
    for (int i = 0; i < 3; ++i) CHECK(V[i] == 0.0);
  }

  const TargetChart c = cubic_chart();
  const TVec y = sample_point(c, rng);
  const TargetGeom tg = target_geometry(c, y.data());
  const TVec V = sharp_gradient_term(c, y.data(), B);
  for (int I = 0; I < 2; ++I) {
    cplx want(0.0, 0.0);
    for (int J = 0; J < 2; ++J)
      for (int K = 0; K < 2; ++K)
        for (int L = 0; L < 2; ++L)
          for (int M = 0; M < 2; ++M)
            for (int N = 0; N < 2; ++N)
              want += tg.Gi[I][J] * tg.dR[J][K][L][M][N] * B[K][M] * B[L][N];
    CHECK(std::abs(want.imag()) < 1e-12 * (std::abs(want) + 1.0));
    CHECK(scaled_err(V[I], want.real(), std::abs(want.real()) + 1.0) < 1e-12);
  }
}

TEST_CASE("admissibility and base points") {
  Rng rng(18);
  {
    const TargetChart c = sphere_chart();
    const TVec b = c.base_point();
    CHECK(c.admissible(b.data()));
    real far[3] = {c.chart_radius + 1.0, 0.0, 0.0};
    CHECK_FALSE(c.admissible(far));
  }
  {
    const TargetChart c = sinh_chart();
    const TVec b = c.base_point();
    CHECK(c.admissible(b.data()));
    real low[3] = {0.5 * c.warp_r_min, 0.0, 0.0};
    CHECK_FALSE(c.admissible(low));
    real high[3] = {c.chart_radius + 0.5, 0.0, 0.0};
    CHECK_FALSE(c.admissible(high));
  }
  {
    const TargetChart c = flat_chart(3);
    real y[3] = {100.0 * rng.sym(), 100.0 * rng.sym(), 100.0 * rng.sym()};
    CHECK(c.admissible(y));
  }
}

TEST_CASE("warp function derivative ladder") {
  const TargetChart sh = sinh_chart();
  const TargetChart cu = cubic_chart();
  const real r = 1.3;
  CHECK(rel(sh.f(r), std::sinh(r)) < 1e-14);
  CHECK(rel(sh.f1(r), std::cosh(r)) < 1e-14);
  CHECK(rel(sh.f2(r), std::sinh(r)) < 1e-14);
  CHECK(rel(sh.f3(r), std::cosh(r)) < 1e-14);
  CHECK(rel(cu.f(r), r + 0.4 * r * r * r) < 1e-14);
  CHECK(rel(cu.f1(r), 1.0 + 1.2 * r * r) < 1e-14);
  CHECK(rel(cu.f2(r), 2.4 * r) < 1e-14);
  CHECK(rel(cu.f3(r), 2.4) < 1e-14);
}

TEST_CASE("chart validation rejects bad shapes") {
  TargetChart c = sphere_chart();
  c.m = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = cubic_chart();
  c.warp_r_min = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = flat_chart(4);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
