#pragma once

#include <array>
#include <vector>

#include "dwm/grid.hpp"
#include "dwm/target.hpp"
#include "dwm/types.hpp"

namespace dwm {

// Discrete state: map phi with coordinate velocity pi, spinor psi with
// covariant time derivative chi.  Layouts: phi/pi  -> (p*m + I) reals,
// psi/chi -> ((p*m + I)*2 + c) complex components.
struct FieldState {
  real t = 0;
  int m = 2;
  std::vector<real> phi, pi;
  std::vector<cplx> psi, chi;

  static FieldState zeros(std::size_t npoints, int m);
  void check_finite() const;  // throws NumericalAbort
};

// in-place u += c*v over all members (t untouched)
void state_axpy(FieldState& u, real c, const FieldState& v);

// Per-point target geometry evaluated along phi.  Throws ChartExit when a
// value of phi leaves the admissible chart.
struct TargetTables {
  int m = 2;
  std::size_t P = 0;
  bool flat = false;
  bool has_gradR = false;
  real max_radius = 0;        // largest chart-radius measure over the slice
  std::vector<real> G, Gi;    // P*m*m
  std::vector<real> Gam;      // P*m*m*m       Gamma^I_{JK}
  std::vector<real> Rup;      // P*m*m*m*m     R^I_{JKL}
  std::vector<real> Rlow;     // P*m*m*m*m     R_{IJKL}
  std::vector<real> dR;       // P*m^5         nabla_M R_{IJKL} (empty if !has_gradR)

  const real* g_at(std::size_t p) const { return G.data() + p * m * m; }
  const real* gi_at(std::size_t p) const { return Gi.data() + p * m * m; }
  const real* gam_at(std::size_t p) const { return Gam.data() + p * m * m * m; }
  const real* rup_at(std::size_t p) const { return Rup.data() + p * m * m * m * m; }
  const real* rlow_at(std::size_t p) const { return Rlow.data() + p * m * m * m * m; }
  const real* dr_at(std::size_t p) const { return dR.data() + p * m * m * m * m * m; }
};

TargetTables build_tables(const TargetChart& chart, const std::vector<real>& phi,
                          std::size_t P, real t);

// coordinate partials of a P*comps field, all directions; layout (p*d + i)*comps + c
template <typename T>
std::vector<T> all_partials(const Grid& g, const std::vector<T>& in, int comps);

// Covariant derivative of a slot field along phi.  Input has `nslots` slots
// (layout (p*nslots + s)*m + I, slots ordered newest-derivative-first); output
// has d*nslots slots with the fresh direction in front.  dphi = all_partials(phi).
std::vector<real> apply_D_map(const Grid& g, const TargetTables& tt,
                              const std::vector<real>& dphi,
                              const std::vector<real>& in, int nslots);

// Spinor version; omega[i] is the (t-dependent, point-independent) spin
// connection along d_i, acting on the 2-component spinor block.
std::vector<cplx> apply_D_spin(const Grid& g, const TargetTables& tt,
                               const std::vector<real>& dphi,
                               const std::array<Mat2, 2>& omega,
                               const std::vector<cplx>& in, int nslots);

// Contract the fresh derivative slot of D(xi) against the leading slot of xi
// with -g^{ij} = -ainv2*delta: implements D* as minus-trace of the same stencil.
template <typename T>
std::vector<T> dstar_contract(const Grid& g, const std::vector<T>& Dxi,
                              int nslots_xi, int comps, real ainv2);

std::vector<real> dstar_d_map(const Grid& g, const TargetTables& tt,
                              const std::vector<real>& dphi,
                              const std::vector<real>& in, int nslots, real ainv2);
std::vector<cplx> dstar_d_spin(const Grid& g, const TargetTables& tt,
                               const std::vector<real>& dphi,
                               const std::array<Mat2, 2>& omega,
                               const std::vector<cplx>& in, int nslots, real ainv2);

// Pointwise G-contracted pairings of slot fields; slot_weight multiplies the
// whole per-point sum (pass ainv2^k for a k-slot field).
std::vector<real> pair_density_map(const TargetTables& tt, const std::vector<real>& u,
                                   const std::vector<real>& v, int nslots, real slot_weight);
std::vector<real> pair_density_spin(const TargetTables& tt, const std::vector<cplx>& u,
                                    const std::vector<cplx>& v, int nslots, real slot_weight);

inline std::vector<real> density_map(const TargetTables& tt, const std::vector<real>& v,
                                     int nslots, real slot_weight) {
  return pair_density_map(tt, v, v, nslots, slot_weight);
}
inline std::vector<real> density_spin(const TargetTables& tt, const std::vector<cplx>& v,
                                      int nslots, real slot_weight) {
  return pair_density_spin(tt, v, v, nslots, slot_weight);
}

// integral over the slice with volume element a^{n-1} dx^{n-1}
real l2_integral(const Grid& g, real a_of_t, int n, const std::vector<real>& density);

// sqrt(sum_{k<=order} ||D^k u||_{L2}^2) for a 0-slot map-vector field u along phi
real sobolev_norm_map(const Grid& g, const TargetTables& tt, const std::vector<real>& dphi,
                      const std::vector<real>& u, int order, real a_of_t, int n);
real sobolev_norm_spin(const Grid& g, const TargetTables& tt, const std::vector<real>& dphi,
                       const std::array<Mat2, 2>& omega, const std::vector<cplx>& u,
                       int order, real a_of_t, int n);

inline Spinor spinor_at(const std::vector<cplx>& v, std::size_t elem) {
  return {v[2 * elem], v[2 * elem + 1]};
}
inline void spinor_set(std::vector<cplx>& v, std::size_t elem, const Spinor& s) {
  v[2 * elem] = s[0];
  v[2 * elem + 1] = s[1];
}
inline void spinor_add(std::vector<cplx>& v, std::size_t elem, const Spinor& s) {
  v[2 * elem] += s[0];
  v[2 * elem + 1] += s[1];
}

}  // namespace dwm
