#include "dwm/target.hpp"

#include <cmath>
#include <cstring>

namespace dwm {

void TargetChart::validate() const {
  if (m < 2 || m > max_target_dim) throw ConfigError("target dimension must be 2 or 3");
  if (kind != TargetKind::flat && m != 2)
    throw ConfigError("sphere and warped-surface charts are two dimensional");
  if (chart_radius <= 0.0) throw ConfigError("chart radius must be positive");
  if (kind == TargetKind::warped_surface && warp_r_min <= 0.0)
    throw ConfigError("warped chart needs a positive inner radius");
}

TVec TargetChart::base_point() const {
  TVec y{};
  if (kind == TargetKind::warped_surface) y[0] = 1.5;  // keep away from the axis r = 0
  return y;
}

bool TargetChart::admissible(const real* y) const {
  switch (kind) {
    case TargetKind::flat: return true;
    case TargetKind::sphere_stereographic: {
      real rho = 0.0;
      for (int i = 0; i < m; ++i) rho += y[i] * y[i];
      return rho < chart_radius * chart_radius;
    }
    case TargetKind::warped_surface:
      return y[0] > warp_r_min && y[0] < chart_radius;
  }
  return false;
}

real TargetChart::f(real r) const {
  return warp == WarpFamily::sinh_r ? std::sinh(r) : r + warp_c3 * r * r * r;
}
real TargetChart::f1(real r) const {
  return warp == WarpFamily::sinh_r ? std::cosh(r) : 1.0 + 3.0 * warp_c3 * r * r;
}
real TargetChart::f2(real r) const {
  return warp == WarpFamily::sinh_r ? std::sinh(r) : 6.0 * warp_c3 * r;
}
real TargetChart::f3(real r) const {
  return warp == WarpFamily::sinh_r ? std::cosh(r) : 6.0 * warp_c3;
}

real TargetChart::gauss_curvature(const real* y) const {
  switch (kind) {
    case TargetKind::flat: return 0.0;
    case TargetKind::sphere_stereographic: return 1.0;
    case TargetKind::warped_surface: return -f2(y[0]) / f(y[0]);
  }
  return 0.0;
}

void TargetChart::metric(const real* y, real G[3][3]) const {
  std::memset(G, 0, sizeof(real) * 9);
  switch (kind) {
    case TargetKind::flat:
      for (int i = 0; i < m; ++i) G[i][i] = 1.0;
      return;
    case TargetKind::sphere_stereographic: {
      real rho = y[0] * y[0] + y[1] * y[1];
      const real w = 4.0 / ((1.0 + rho) * (1.0 + rho));
      G[0][0] = G[1][1] = w;
      return;
    }
    case TargetKind::warped_surface: {
      const real fr = f(y[0]);
      G[0][0] = 1.0;
      G[1][1] = fr * fr;
      return;
    }
  }
}

void TargetChart::metric_inv(const real* y, real Gi[3][3]) const {
  real G[3][3];
  metric(y, G);
  std::memset(Gi, 0, sizeof(real) * 9);
  for (int i = 0; i < m; ++i) Gi[i][i] = 1.0 / G[i][i];  // all chart metrics are diagonal
}

void TargetChart::christoffel(const real* y, real Gam[3][3][3]) const {
  std::memset(Gam, 0, sizeof(real) * 27);
  switch (kind) {
    case TargetKind::flat: return;
    case TargetKind::sphere_stereographic: {
      // conformal metric e^{2u} delta with u = log 2 - log(1+|y|^2):
      // Gamma^I_JK = delta^I_J u_K + delta^I_K u_J - delta_JK u_I
      const real rho = y[0] * y[0] + y[1] * y[1];
      real du[2] = {-2.0 * y[0] / (1.0 + rho), -2.0 * y[1] / (1.0 + rho)};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) {
            real v = 0.0;
            if (i == j) v += du[k];
            if (i == k) v += du[j];
            if (j == k) v -= du[i];
            Gam[i][j][k] = v;
          }
      return;
    }
    case TargetKind::warped_surface: {
      const real fr = f(y[0]), dfr = f1(y[0]);
      Gam[0][1][1] = -fr * dfr;        // Gamma^r_{theta theta}
      Gam[1][0][1] = Gam[1][1][0] = dfr / fr;  // Gamma^theta_{r theta}
      return;
    }
  }
}

void TargetChart::riemann_lowered(const real* y, real R[3][3][3][3]) const {
  std::memset(R, 0, sizeof(real) * 81);
  if (kind == TargetKind::flat) return;
  // both curved charts are 2d: R_IJKL = K(y) (G_IK G_JL - G_IL G_JK)
  real G[3][3];
  metric(y, G);
  const real K = gauss_curvature(y);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          R[i][j][k][l] = K * (G[i][k] * G[j][l] - G[i][l] * G[j][k]);
}

void TargetChart::grad_riemann(const real* y, real dR[3][3][3][3][3]) const {
  std::memset(dR, 0, sizeof(real) * 243);
  if (!has_grad_curvature()) return;  // flat, sphere and sinh warp have parallel curvature
  // nabla(K G^G) = (dK) G^G since G is parallel; dK = (K'(r), 0)
  real G[3][3];
  metric(y, G);
  const real r = y[0];
  const real Kp = -f3(r) / f(r) + f2(r) * f1(r) / (f(r) * f(r));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          dR[0][i][j][k][l] = Kp * (G[i][k] * G[j][l] - G[i][l] * G[j][k]);
}

void TargetChart::christoffel_partial(const real* y, real dGam[3][3][3][3]) const {
  std::memset(dGam, 0, sizeof(real) * 81);
  switch (kind) {
    case TargetKind::flat: return;
    case TargetKind::sphere_stereographic: {
      // u_K = -2 y_K / (1+|y|^2); the Gamma pattern is linear in du
      const real c = 1.0 / (1.0 + y[0] * y[0] + y[1] * y[1]);
      real du[2][2];
      for (int a = 0; a < 2; ++a)
        for (int k = 0; k < 2; ++k)
          du[a][k] = (a == k ? -2.0 * c : 0.0) + 4.0 * y[k] * y[a] * c * c;
      for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
              real v = 0.0;
              if (i == j) v += du[a][k];
              if (i == k) v += du[a][j];
              if (j == k) v -= du[a][i];
              dGam[a][i][j][k] = v;
            }
      return;
    }
    case TargetKind::warped_surface: {
      const real fr = f(y[0]), d1 = f1(y[0]), d2 = f2(y[0]);
      dGam[0][0][1][1] = -(d1 * d1 + fr * d2);
      dGam[0][1][0][1] = dGam[0][1][1][0] = d2 / fr - (d1 / fr) * (d1 / fr);
      return;
    }
  }
}

void TargetChart::riemann_partial(const real* y, real dRp[3][3][3][3][3]) const {
  std::memset(dRp, 0, sizeof(real) * 243);
  if (kind == TargetKind::flat) return;
  // 2d charts: R_IJKL = K(y) (G_IK G_JL - G_IL G_JK); product rule on the
  // chart components
  real G[3][3];
  metric(y, G);
  const real Kv = gauss_curvature(y);
  real dG[2][2][2] = {};
  real dK[2] = {0.0, 0.0};
  if (kind == TargetKind::sphere_stereographic) {
    const real c = 1.0 / (1.0 + y[0] * y[0] + y[1] * y[1]);
    for (int a = 0; a < 2; ++a) dG[a][0][0] = dG[a][1][1] = -16.0 * y[a] * c * c * c;
  } else {
    const real fr = f(y[0]), d1 = f1(y[0]), d2 = f2(y[0]), d3 = f3(y[0]);
    dG[0][1][1] = 2.0 * fr * d1;
    dK[0] = -d3 / fr + d2 * d1 / (fr * fr);
  }
  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            dRp[a][i][j][k][l] = dK[a] * (G[i][k] * G[j][l] - G[i][l] * G[j][k]) +
                                 Kv * (dG[a][i][k] * G[j][l] + G[i][k] * dG[a][j][l] -
                                       dG[a][i][l] * G[j][k] - G[i][l] * dG[a][j][k]);
}

TargetGeom target_geometry(const TargetChart& chart, const real* y) {
  TargetGeom g;
  chart.metric(y, g.G);
  chart.metric_inv(y, g.Gi);
  chart.christoffel(y, g.Gam);
  chart.riemann_lowered(y, g.R);
  chart.grad_riemann(y, g.dR);
  const int m = chart.m;
  std::memset(g.Rup, 0, sizeof(real) * 81);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          real v = 0.0;
          for (int a = 0; a < m; ++a) v += g.Gi[i][a] * g.R[a][j][k][l];
          g.Rup[i][j][k][l] = v;
        }
  return g;
}

TVec curvature_operator(const TargetGeom& g, int m, const TVec& X, const TVec& Y, const TVec& Z) {
  TVec out{};
  for (int i = 0; i < m; ++i) {
    real v = 0.0;
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) v += g.Rup[i][j][k][l] * X[k] * Y[l] * Z[j];
    out[i] = v;
  }
  return out;
}

TVec sharp_gradient_term(const TargetChart& chart, const real* y, const cplx B[3][3]) {
  const int m = chart.m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (std::abs(B[i][j] - std::conj(B[j][i])) > 1e-10 * (1.0 + std::abs(B[i][j])))
        throw std::invalid_argument("sharp_gradient_term: bilinear table is not hermitian");

  TVec out{};
  if (!chart.has_grad_curvature()) return out;  // exact zero, no arithmetic

  real dR[3][3][3][3][3], Gi[3][3];
  chart.grad_riemann(y, dR);
  chart.metric_inv(y, Gi);
  for (int i = 0; i < m; ++i) {
    cplx v = 0.0;
    for (int d = 0; d < m; ++d) {
      if (Gi[i][d] == 0.0) continue;
      cplx acc = 0.0;
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          for (int mm = 0; mm < m; ++mm)
            for (int nn = 0; nn < m; ++nn)
              acc += dR[d][k][l][mm][nn] * B[k][mm] * B[l][nn];
      v += Gi[i][d] * acc;
    }
    if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
      throw std::runtime_error("sharp_gradient_term: nonreal contraction");
    out[i] = v.real();
  }
  return out;
}

}  // namespace dwm
