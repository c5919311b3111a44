#pragma once

#include <array>

#include "dwm/profiles.hpp"
#include "dwm/types.hpp"

namespace dwm {

// Expanding warped-product background in its conformally rescaled form
//   h = -s(t)^{-2} dt^2 + a(t)^2 delta_ij dx^i dx^j   on  R x T^{n-1},
// together with the lapse N of the original metric (N s)^2 h.  n is 2 or 3.
struct WarpedSpacetime {
  int n = 3;
  Profile s = Profile::exponential(1.0);
  Profile a = Profile::constant(1.0);
  Lapse N = Lapse::one();
  real horizon = 10.0;  // run end time; profile validity is checked on [0, horizon]

  int spatial_dim() const { return n - 1; }
  int sobolev_r() const { return n == 2 ? 1 : 2; }  // r = 1 (n=2), r = 2 (n=3)
  void validate() const;                            // monotonicity / positivity requirements
};

// Nonzero Christoffel blocks of h on the scaled flat torus (all others vanish):
//   Gamma^0_00 = -sdot/s,  Gamma^0_ij = s^2 a adot delta_ij,  Gamma^j_i0 = (adot/a) delta^j_i.
struct ChristoffelData {
  real g000 = 0.0;
  real g0ij = 0.0;  // coefficient of delta_ij
  real gji0 = 0.0;  // coefficient of delta^j_i
};

struct CurvatureData {
  int n = 3;
  // coordinate components R^rho_{sigma mu nu}; index 0 is t
  real riem[3][3][3][3] = {};
  real scal = 0.0;
};

struct ConformalIntegrals {
  real phi = 0.0;             // int_0^T (s^{-1} + f)
  real sinv_integral = 0.0;   // int_0^T s^{-1}
  real f_integral = 0.0;      // int_0^T (n-2) s^{1-n} sdot
  bool sinv_divergent = false;  // heuristic: no sign of convergence (e.g. s constant)
};

ChristoffelData christoffels(const WarpedSpacetime& st, real t);
ChristoffelData christoffels_dt(const WarpedSpacetime& st, real t);

// Second fundamental form of the slice {t} x T^{n-1}: II_ij = -(s/2) gdot_ij;
// returns the coefficient of delta_ij (the only shape the artifact metrics produce).
real second_fundamental_form(const WarpedSpacetime& st, real t);

// Exact coordinate curvature of h from the Christoffel blocks and their analytic
// time derivatives (the background is spatially homogeneous, so no x argument).
CurvatureData curvature(const WarpedSpacetime& st, real t);

// f(t) = (n-2) s^{1-n} sdot, the decay-rate weight of the energy inequality.
real decay_rate_f(const WarpedSpacetime& st, real t);

// Adaptive-Simpson values of the horizon integrals entering the Gronwall bound.
ConformalIntegrals conformal_factor_integrals(const WarpedSpacetime& st, real T);

// int_{t0}^{t1} (s^{-1} + f), the increment of the modified time Phi
real conformal_phi_between(const WarpedSpacetime& st, real t0, real t1);

// full Christoffel array Gamma^rho_{mu nu} (and its t-derivative) for generic
// coordinate-formula assembly; sized n x n x n
void christoffel_array(const WarpedSpacetime& st, real t, real G[3][3][3]);
void christoffel_array_dt(const WarpedSpacetime& st, real t, real G[3][3][3]);

}  // namespace dwm
