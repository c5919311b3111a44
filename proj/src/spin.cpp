#include "dwm/spin.hpp"

#include <cmath>

namespace dwm {

SpinFrame SpinFrame::standard(int n) {
  SpinFrame fr;
  fr.n = n;
  const cplx I(0.0, 1.0);
  // gamma_0 = sigma_1, gamma_1 = i sigma_2, gamma_2 = i sigma_3
  fr.gamma0.e = {0.0, 1.0, 1.0, 0.0};
  fr.gamma_sp[0].e = {0.0, 1.0, -1.0, 0.0};
  fr.gamma_sp[1].e = {I, 0.0, 0.0, -I};
  fr.beta = fr.gamma0;
  return fr;
}

std::array<Mat2, 2> spin_connection(const SpinFrame& fr, const WarpedSpacetime& st, real t) {
  const real coeff = -0.5 * st.s.value(t) * st.a.d1(t);
  std::array<Mat2, 2> om{Mat2::zero(), Mat2::zero()};
  for (int i = 0; i < st.spatial_dim(); ++i) om[i] = coeff * (fr.gamma0 * fr.gamma_sp[i]);
  return om;
}

Mat2 spin_curvature_from_riemann(const SpinFrame& fr, const WarpedSpacetime& st, real t,
                                 int mu, int nu) {
  const int n = st.n;
  const CurvatureData cv = curvature(st, t);
  const real s = st.s.value(t), a = st.a.value(t);
  // frame coefficients e_alpha = A^rho_alpha d_rho and metric diag(h00, hii)
  real A[3] = {s, 1.0 / a, 1.0 / a};  // diagonal: A^rho_alpha = A[alpha] delta^rho_alpha
  const real h00 = -1.0 / (s * s), hii = a * a;
  real eta[3] = {-1.0, 1.0, 1.0};

  Mat2 out = Mat2::zero();
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      // h(R(d_mu, d_nu) e_alpha, e_beta) = R^rho_{alpha' mu nu} A[al] A[be] h_{rho beta'}
      const real hbe = (be == 0) ? h00 : hii;
      const real comp = cv.riem[be][al][mu][nu] * A[al] * A[be] * hbe;
      if (comp == 0.0) continue;
      const Mat2 ga = (al == 0) ? fr.gamma0 : fr.gamma_sp[al - 1];
      const Mat2 gb = (be == 0) ? fr.gamma0 : fr.gamma_sp[be - 1];
      out = out + (0.25 * comp * eta[al] * eta[be]) * (ga * gb);
    }
  return out;
}

real conformal_weight(int n, real ns, RescaleDirection dir) {
  const real expo = 0.5 * (1.0 - n);
  return dir == RescaleDirection::to_conformal ? std::pow(ns, expo) : std::pow(ns, -expo);
}

Mat2 spin_connection_general(const SpinFrame& fr, int n, const real Gamma[3][3][3],
                             const real A[3][3], const real dA[3][3][3], const real eta[3],
                             int mu) {
  // W^alpha_beta(d_mu): nabla_{d_mu} e_beta = W^alpha_beta e_alpha, via the inverse frame
  real Ainv[3][3] = {};  // (A^{-1})^alpha_nu, frame matrices here are small enough to invert directly
  if (n == 2) {
    const real det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    Ainv[0][0] = A[1][1] / det;
    Ainv[0][1] = -A[0][1] / det;
    Ainv[1][0] = -A[1][0] / det;
    Ainv[1][1] = A[0][0] / det;
  } else {
    real det = 0.0;
    for (int i = 0; i < 3; ++i)
      det += A[i][0] * (A[(i + 1) % 3][1] * A[(i + 2) % 3][2] -
                        A[(i + 2) % 3][1] * A[(i + 1) % 3][2]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        Ainv[j][i] = (A[(i + 1) % 3][(j + 1) % 3] * A[(i + 2) % 3][(j + 2) % 3] -
                      A[(i + 1) % 3][(j + 2) % 3] * A[(i + 2) % 3][(j + 1) % 3]) /
                     det;
  }

  Mat2 out = Mat2::zero();
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      real W = 0.0;  // W^al_be(d_mu)
      for (int lam = 0; lam < n; ++lam) {
        real cov = dA[mu][lam][be];
        for (int nu = 0; nu < n; ++nu) cov += Gamma[lam][mu][nu] * A[nu][be];
        W += Ainv[al][lam] * cov;
      }
      const real om = eta[al] * W;  // omega_{al be} = eta_{al gamma} W^gamma_be (eta diagonal)
      if (om == 0.0) continue;
      const Mat2 ga = (al == 0) ? fr.gamma0 : fr.gamma_sp[al - 1];
      const Mat2 gb = (be == 0) ? fr.gamma0 : fr.gamma_sp[be - 1];
      out = out + (-0.25 * om * eta[al] * eta[be]) * (ga * gb);
    }
  return out;
}

}  // namespace dwm
