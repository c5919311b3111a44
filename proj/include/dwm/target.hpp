#pragma once

#include "dwm/types.hpp"

namespace dwm {

// Target manifolds presented in a single fixed chart with closed-form metric,
// Christoffels, curvature R_IJKL and its covariant gradient.
enum class TargetKind { flat, sphere_stereographic, warped_surface };
enum class WarpFamily { sinh_r, cubic };  // f(r) = sinh r (K = -1), f(r) = r + c r^3

struct TargetChart {
  TargetKind kind = TargetKind::sphere_stereographic;
  int m = 2;                 // target dimension; > 2 only for the flat chart
  real chart_radius = 10.0;  // sphere: |y| bound (hard error); warped: r upper bound
  real warp_r_min = 0.1;     // warped: lower bound keeping the chart nondegenerate
  WarpFamily warp = WarpFamily::sinh_r;
  real warp_c3 = 1.0;  // cubic family coefficient

  void validate() const;
  TVec base_point() const;
  bool admissible(const real* y) const;
  bool flat_geometry() const { return kind == TargetKind::flat; }
  // drops to exactly zero for flat and for the constant-curvature charts
  bool has_grad_curvature() const {
    return kind == TargetKind::warped_surface && warp == WarpFamily::cubic;
  }

  void metric(const real* y, real G[3][3]) const;
  void metric_inv(const real* y, real Gi[3][3]) const;
  void christoffel(const real* y, real Gam[3][3][3]) const;        // Gam[I][J][K] = Gamma^I_JK
  void riemann_lowered(const real* y, real R[3][3][3][3]) const;   // R_{IJKL}
  void grad_riemann(const real* y, real dR[3][3][3][3][3]) const;  // dR[M][I][J][K][L] = nabla_M R_{IJKL}
  real gauss_curvature(const real* y) const;                       // 2d charts only

  // coordinate partials of the chart tables (not covariant derivatives); used
  // by the exact discrete-action gradients in the verification battery
  void christoffel_partial(const real* y, real dGam[3][3][3][3]) const;  // dGam[A][I][J][K] = d_A Gamma^I_JK
  void riemann_partial(const real* y, real dRp[3][3][3][3][3]) const;    // dRp[A][I][J][K][L] = d_A R_IJKL

  // warp function and derivatives (warped_surface only)
  real f(real r) const;
  real f1(real r) const;
  real f2(real r) const;
  real f3(real r) const;
};

struct TargetGeom {
  real G[3][3];
  real Gi[3][3];
  real Gam[3][3][3];
  real R[3][3][3][3];      // lowered
  real Rup[3][3][3][3];    // R^I_{JKL} = G^{IM} R_{MJKL}
  real dR[3][3][3][3][3];  // nabla_M R_{IJKL}
};

TargetGeom target_geometry(const TargetChart& chart, const real* y);

// (R^P(X,Y)Z)^I = R^I_{JKL} X^K Y^L Z^J, the contraction convention fixed by the
// sphere identity R^P(X,Y)Y = X for orthonormal X,Y.
TVec curvature_operator(const TargetGeom& g, int m, const TVec& X, const TVec& Y, const TVec& Z);

// V^I = G^{IJ} nabla_J R_{KLMN} B^{KM} B^{LN} for a hermitian bilinear table B;
// imaginary parts cancel by the pair symmetry of R and hermiticity of B, which is asserted.
TVec sharp_gradient_term(const TargetChart& chart, const real* y, const cplx B[3][3]);

}  // namespace dwm
