#pragma once

#include <array>
#include <vector>

#include "dwm/fields.hpp"
#include "dwm/geometry.hpp"
#include "dwm/spin.hpp"
#include "dwm/target.hpp"

namespace dwm {

// Everything fixed over a run: background, target chart, grid, spin frame.
struct Model {
  WarpedSpacetime st;
  TargetChart chart;
  Grid grid;
  SpinFrame frame = SpinFrame::standard(3);
  bool spinor_on = true;

  void validate() const;
  real a_min() const;  // lower bound of a over the run, for the CFL bound
};

// Covariant accelerations forced by the field equations:
//   ddphi = nabla_t pi,  ddpsi = nabla_t chi.
// Carries the target tables of the slice (Gamma transport reuses them).
struct RhsResult {
  std::vector<real> ddphi;  // P*m
  std::vector<cplx> ddpsi;  // P*m*2
  TargetTables tt;
};

RhsResult covariant_rhs(const Model& M, const FieldState& st);

// coordinate-time derivatives fed to the integrator (Gamma(pi, .) transport terms folded in)
struct StateDeriv {
  std::vector<real> dphi, dpi;
  std::vector<cplx> dpsi, dchi;
};

StateDeriv coordinate_deriv(const Model& M, const FieldState& st, real* max_radius = nullptr);

// classical RK4 step; accumulates the chart-radius high-water mark if given
FieldState rk4_step(const Model& M, const FieldState& st, real dt, real* max_radius = nullptr);

// dt = min(dt_max, cfl * s(t) * a_min * dx); conformal wave speed is 1/(s a)
real cfl_dt(const Model& M, real t, real cfl, real dt_max);

// E^I_K = R^I_{JKL} <psi^J, psi^L> at point p (complex in general)
void endomorphism_E(const TargetTables& tt, std::size_t p, const std::vector<cplx>& psi,
                    cplx E[3][3]);

// Dslash psi = -s gamma_0 chi + a^{-1} sum_i gamma_i nabla_i psi
std::vector<cplx> dirac_apply(const Model& M, const FieldState& st);

// chi solving the first-order constraint i Dslash psi = 1/3 (Ns)^{2-n} E psi exactly
// (inverts the same discrete operator dirac_residual measures)
std::vector<cplx> dirac_compatible_chi(const Model& M, const FieldState& st);

// || i Dslash psi - 1/3 (Ns)^{2-n} E psi ||_{L2} / (||psi||_{H1} + 1e-30)
real dirac_residual(const Model& M, const FieldState& st);

struct InitParams {
  real epsilon = 1e-2;
  unsigned long long seed = 1;
  int mode_cutoff = 4;
  bool spinor = true;
};

// Random truncated trig polynomials (phi without the constant mode), rescaled by a
// common factor until ||phi-y0||_{H^{r+1}} + ||pi||_{H^r} + ||psi||_{H^r} = eps/2,
// then chi from the Dirac constraint.
FieldState make_initial_data(const Model& M, const InitParams& ip);

}  // namespace dwm
