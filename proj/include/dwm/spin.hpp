#pragma once

#include <array>

#include "dwm/geometry.hpp"
#include "dwm/types.hpp"

namespace dwm {

// Spinor bundle data for the pseudo-orthonormal frame e_0 = s d_t, e_i = a^{-1} d_i.
// Gamma matrices satisfy  X. Y. + Y. X. = -2 h(X,Y),  beta = gamma_0 intertwines:
// gamma_alpha^dagger beta = beta gamma_alpha.  The indefinite pairing is
// <a,b> = a^dagger gamma_0 b and the positive product (a,b) = <a, e_0 . b> = a^dagger b.
struct SpinFrame {
  int n = 3;
  Mat2 gamma0;                   // e_0 Clifford action
  std::array<Mat2, 2> gamma_sp;  // e_i Clifford action, i < n-1
  Mat2 beta;                     // = gamma0

  static SpinFrame standard(int n);
};

inline cplx pair_indef(const Spinor& a, const Spinor& b) {
  // <a,b> = a^dagger gamma_0 b with gamma_0 = sigma_1
  return std::conj(a[0]) * b[1] + std::conj(a[1]) * b[0];
}
inline cplx pair_pos(const Spinor& a, const Spinor& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

// Spin-connection coefficients along the coordinate directions d_i (the time
// direction is parallel: omega_t = 0).  Closed form on the scaled flat torus:
// omega_{d_i} = -1/2 s adot gamma_0 gamma_i, the sign fixed by the numerical
// compatibility check nabla(X . psi) = (nabla X) . psi + X . nabla psi.
std::array<Mat2, 2> spin_connection(const SpinFrame& fr, const WarpedSpacetime& st, real t);

// Spin curvature R^{SM}(X,Y) assembled from the coordinate Riemann tensor:
//   R^{SM}(X,Y) = 1/4 sum_{alpha beta} h(R(X,Y) e_alpha, e_beta) gamma^alpha gamma^beta
// with gamma^alpha = eta^{alpha alpha} gamma_alpha.  X,Y are coordinate directions
// (0 = t); used by the commutator identity checks.
Mat2 spin_curvature_from_riemann(const SpinFrame& fr, const WarpedSpacetime& st, real t,
                                 int mu, int nu);

// Conformal weight application psi -> (Ns)^{pm (1-n)/2} psi.
enum class RescaleDirection { to_conformal, from_conformal };
real conformal_weight(int n, real ns, RescaleDirection dir);

// --- generic frame machinery (used by the conformal covariance check) ---

// Spinor connection coefficient sigma_mu = -1/4 omega_{alpha beta}(d_mu) gamma^alpha gamma^beta
// for an arbitrary analytic metric given by its coordinate Christoffels and a
// pseudo-orthonormal frame e_alpha = A^nu_alpha d_nu (dA[mu][nu][alpha] = d_mu A^nu_alpha).
// The same convention reproduces the closed-form omega above on the warped background.
Mat2 spin_connection_general(const SpinFrame& fr, int n, const real Gamma[3][3][3],
                             const real A[3][3], const real dA[3][3][3], const real eta[3],
                             int mu);

}  // namespace dwm
