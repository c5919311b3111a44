#include "dwm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dwm {

void Model::validate() const {
  st.validate();
  chart.validate();
  grid.validate();
  if (grid.nsp != st.n - 1) throw ConfigError("grid dimension must equal n - 1");
  if (frame.n != st.n) throw ConfigError("spin frame dimension mismatch");
}

real Model::a_min() const {
  switch (st.a.family) {
    case ProfileFamily::constant:
      return st.a.c;
    case ProfileFamily::oscillating:
      return st.a.c * (1.0 - std::abs(st.a.p1));
    default: {
      real lo = st.a.value(0.0);
      for (int i = 1; i <= 1000; ++i)
        lo = std::min(lo, st.a.value(st.horizon * i / 1000.0));
      return lo;
    }
  }
}

namespace {

// (Ns)^{2-n} and friends, sampled per point; at n = 2 everything is exactly 1 / 0
struct WeightTables {
  std::vector<real> w2;   // (Ns)^{2-n}
  std::vector<real> w4;   // (Ns)^{4-2n}
  std::vector<real> dwt;  // d_t (Ns)^{2-n}
  std::vector<real> dwx;  // P*d, d_i (Ns)^{2-n}
};

WeightTables conformal_weights(const Model& M, real s, real sd) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int d = g.nsp;
  WeightTables w;
  w.w2.assign(P, 1.0);
  w.w4.assign(P, 1.0);
  w.dwt.assign(P, 0.0);
  w.dwx.assign(P * d, 0.0);
  if (M.st.n == 2) return w;
  real x[2] = {0.0, 0.0};
  for (std::size_t p = 0; p < P; ++p) {
    g.coords(p, x);
    const real N = M.st.N.value(x);
    const real ns = N * s;
    w.w2[p] = 1.0 / ns;
    w.w4[p] = 1.0 / (ns * ns);
    w.dwt[p] = -w.w2[p] * (sd / s);  // (2-n) = -1, Ndot = 0
    for (int i = 0; i < d; ++i) {
      const real dn = M.st.N.dx(i, x);
      if (dn != 0.0) w.dwx[p * d + i] = -w.w2[p] * dn / N;
    }
  }
  return w;
}

}  // namespace

void endomorphism_E(const TargetTables& tt, std::size_t p, const std::vector<cplx>& psi,
                    cplx E[3][3]) {
  const int m = tt.m;
  const real* rup = tt.rup_at(p);
  Spinor ps[3];
  for (int I = 0; I < m; ++I) ps[I] = spinor_at(psi, p * m + I);
  for (int I = 0; I < 3; ++I)
    for (int K = 0; K < 3; ++K) E[I][K] = cplx(0.0, 0.0);
  if (tt.flat) return;
  cplx B[3][3];
  for (int J = 0; J < m; ++J)
    for (int L = 0; L < m; ++L) B[J][L] = pair_indef(ps[J], ps[L]);
  for (int I = 0; I < m; ++I)
    for (int K = 0; K < m; ++K) {
      cplx e(0.0, 0.0);
      for (int J = 0; J < m; ++J)
        for (int L = 0; L < m; ++L) {
          const real r = rup[((I * m + J) * m + K) * m + L];
          if (r != 0.0) e += r * B[J][L];
        }
      E[I][K] = e;
    }
}

RhsResult covariant_rhs(const Model& M, const FieldState& fs) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int d = g.nsp, m = fs.m, n = M.st.n;
  const real t = fs.t;
  const real s = M.st.s.value(t), sd = M.st.s.d1(t);
  const real a = M.st.a.value(t), ad = M.st.a.d1(t);
  const real ainv = 1.0 / a, ainv2 = ainv * ainv, sinv2 = 1.0 / (s * s);
  const real hub = ad / a;

  RhsResult out;
  out.tt = build_tables(M.chart, fs.phi, P, t);
  const TargetTables& tt = out.tt;
  const std::vector<real> dphi = all_partials(g, fs.phi, m);

  // spatial map operator in divergence form.  Pairing w G_{IJ} spat^J against
  // a direction is then the exact gradient of the 1/2 w |Dphi|^2 quadrature
  // under the same stencils (centered differences are skew-adjoint on the
  // periodic grid), so the assembled EL residual stays the exact gradient of
  // the discrete action; the lapse-gradient term rides inside the flux.
  std::vector<real> wgt(P, 1.0);
  if (n > 2) {
    if (M.st.N.trivial()) {
      std::fill(wgt.begin(), wgt.end(), std::pow(s, n - 2));
    } else {
      real xw[2] = {0.0, 0.0};
      for (std::size_t p = 0; p < P; ++p) {
        g.coords(p, xw);
        wgt[p] = std::pow(M.st.N.value(xw) * s, n - 2);
      }
    }
  }
  std::vector<real> flux(P * d * m);
  for (std::size_t p = 0; p < P; ++p) {
    const real* G = tt.g_at(p);
    for (int i = 0; i < d; ++i) {
      const real* dp = dphi.data() + (p * d + i) * m;
      real* f = flux.data() + (p * d + i) * m;
      for (int I = 0; I < m; ++I) {
        real acc = 0.0;
        for (int J = 0; J < m; ++J) acc += G[I * m + J] * dp[J];
        f[I] = wgt[p] * acc;
      }
    }
  }
  const std::vector<real> dflux = all_partials(g, flux, d * m);
  std::vector<real> spat(P * m);  // (1/(w a^2)) G^{KI} [div flux - (w/2) dG(dphi,dphi)]
  for (std::size_t p = 0; p < P; ++p) {
    const real* G = tt.g_at(p);
    const real* Gi = tt.gi_at(p);
    real low[3] = {0.0, 0.0, 0.0};
    for (int I = 0; I < m; ++I) {
      real acc = 0.0;
      for (int i = 0; i < d; ++i) acc += dflux[((p * d + i) * d + i) * m + I];
      low[I] = acc;
    }
    if (!tt.flat) {
      const real* gam = tt.gam_at(p);
      for (int I = 0; I < m; ++I) {
        // (1/2) d_I G_{JK} dphi^J dphi^K = G_{LK} Gamma^L_{IJ} dphi^J dphi^K
        real c = 0.0;
        for (int i = 0; i < d; ++i) {
          const real* dp = dphi.data() + (p * d + i) * m;
          for (int J = 0; J < m; ++J)
            for (int K = 0; K < m; ++K)
              for (int L = 0; L < m; ++L)
                c += G[L * m + K] * gam[(L * m + I) * m + J] * dp[J] * dp[K];
        }
        low[I] -= wgt[p] * c;
      }
    }
    const real fac = ainv2 / wgt[p];
    for (int K = 0; K < m; ++K) {
      real acc = 0.0;
      for (int I = 0; I < m; ++I) acc += Gi[K * m + I] * low[I];
      spat[p * m + K] = fac * acc;
    }
  }

  out.ddphi.assign(P * m, 0.0);
  out.ddpsi.assign(P * m * 2, cplx(0.0, 0.0));

  const bool spin = M.spinor_on;
  const std::array<Mat2, 2> omega = spin_connection(M.frame, M.st, t);
  Mat2 g0gi[2], gik[2][2];
  for (int i = 0; i < d; ++i) {
    g0gi[i] = M.frame.gamma0 * M.frame.gamma_sp[i];
    for (int k = 0; k < d; ++k) gik[i][k] = M.frame.gamma_sp[i] * M.frame.gamma_sp[k];
  }

  std::vector<cplx> Dpsi, box_sp_psi;
  real scal = 0.0;
  WeightTables W;
  if (spin) {
    Dpsi = apply_D_spin(g, tt, dphi, omega, fs.psi, 1);
    box_sp_psi =
        dstar_contract(g, apply_D_spin(g, tt, dphi, omega, Dpsi, d), d, 2 * m, ainv2);
    scal = curvature(M.st, t).scal;
    W = conformal_weights(M, s, sd);
  }

  for (std::size_t p = 0; p < P; ++p) {
    const real* pi_p = fs.pi.data() + p * m;
    const real* dph = dphi.data() + p * d * m;
    const real* rup = tt.flat ? nullptr : tt.rup_at(p);

    real src[3] = {0.0, 0.0, 0.0};

    // (n-2) * (-s sdot pi); the (n-2) dN/N gradient term sits in the flux
    if (n > 2)
      for (int I = 0; I < m; ++I) src[I] += -s * sd * pi_p[I];

    Spinor ps[3], ch[3];
    cplx B[3][3] = {}, E[3][3] = {};
    if (spin) {
      for (int I = 0; I < m; ++I) {
        ps[I] = spinor_at(fs.psi, p * m + I);
        ch[I] = spinor_at(fs.chi, p * m + I);
      }
      if (!tt.flat) {
        for (int J = 0; J < m; ++J)
          for (int L = 0; L < m; ++L) B[J][L] = pair_indef(ps[J], ps[L]);
        for (int I = 0; I < m; ++I)
          for (int K = 0; K < m; ++K) {
            cplx e(0.0, 0.0);
            for (int J = 0; J < m; ++J)
              for (int L = 0; L < m; ++L) {
                const real r = rup[((I * m + J) * m + K) * m + L];
                if (r != 0.0) e += r * B[J][L];
              }
            E[I][K] = e;
          }

        // spinor curvature source of the map equation
        cplx C0[3][3], Ci[2][3][3];
        for (int K = 0; K < m; ++K)
          for (int L = 0; L < m; ++L) {
            C0[K][L] = cplx(0.0, 1.0) * pair_pos(ps[K], ps[L]);
            for (int i = 0; i < d; ++i)
              Ci[i][K][L] = cplx(0.0, 1.0) * pair_pos(ps[K], g0gi[i] * ps[L]);
          }
        for (int I = 0; I < m; ++I) {
          cplx acc(0.0, 0.0);
          for (int J = 0; J < m; ++J)
            for (int K = 0; K < m; ++K)
              for (int L = 0; L < m; ++L) {
                const real r = rup[((I * m + J) * m + K) * m + L];
                if (r == 0.0) continue;
                cplx inner = -s * C0[K][L] * pi_p[J];
                for (int i = 0; i < d; ++i)
                  inner += ainv * Ci[i][K][L] * dph[i * m + J];
                acc += r * inner;
              }
          src[I] += -0.5 * W.w2[p] * std::real(acc);
        }

        if (tt.has_gradR) {
          const TVec V = sharp_gradient_term(M.chart, fs.phi.data() + p * m, B);
          for (int I = 0; I < m; ++I) src[I] += (1.0 / 12.0) * W.w4[p] * V[I];
        }
      }
    }

    for (int I = 0; I < m; ++I)
      out.ddphi[p * m + I] =
          sinv2 * (-s * sd * pi_p[I] - s * s * (n - 1) * hub * pi_p[I] +
                   spat[p * m + I] + src[I]);

    if (!spin) continue;

    // ---- spinor equation ----
    Spinor dps[2][3];
    for (int i = 0; i < d; ++i)
      for (int I = 0; I < m; ++I) dps[i][I] = spinor_at(Dpsi, (p * d + i) * m + I);

    Spinor rhs[3];
    for (int I = 0; I < m; ++I) rhs[I] = (-0.25 * scal) * ps[I];

    if (!tt.flat) {
      const real* gi = tt.gi_at(p);
      const real* dr = tt.has_gradR ? tt.dr_at(p) : nullptr;

      // (s/a) gamma_0 gamma_i R(pi, d_i phi) psi
      for (int i = 0; i < d; ++i)
        for (int I = 0; I < m; ++I) {
          Spinor u{cplx(0.0), cplx(0.0)};
          for (int J = 0; J < m; ++J)
            for (int K = 0; K < m; ++K)
              for (int L = 0; L < m; ++L) {
                const real r = rup[((I * m + J) * m + K) * m + L];
                if (r != 0.0) u += (r * pi_p[K] * dph[i * m + L]) * ps[J];
              }
          rhs[I] += (s * ainv) * (g0gi[i] * u);
        }

      // -(1/(2a^2)) gamma_i gamma_k R(d_i phi, d_k phi) psi, i != k
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
          if (i == k) continue;
          for (int I = 0; I < m; ++I) {
            Spinor u{cplx(0.0), cplx(0.0)};
            for (int J = 0; J < m; ++J)
              for (int K = 0; K < m; ++K)
                for (int L = 0; L < m; ++L) {
                  const real r = rup[((I * m + J) * m + K) * m + L];
                  if (r != 0.0) u += (r * dph[i * m + K] * dph[k * m + L]) * ps[J];
                }
            rhs[I] += (-0.5 * ainv2) * (gik[i][k] * u);
          }
        }

      // (i/3) gamma^alpha T_alpha psi with T = d(w) E + w nabla E
      auto grad_E = [&](const real* dir_phi /* m comps */, const Spinor* dpsJ,
                        cplx out_E[3][3]) {
        for (int I = 0; I < m; ++I)
          for (int K = 0; K < m; ++K) {
            cplx e(0.0, 0.0);
            if (dr)
              for (int A = 0; A < m; ++A)
                for (int J = 0; J < m; ++J)
                  for (int L = 0; L < m; ++L)
                    for (int Mi = 0; Mi < m; ++Mi)
                      e += gi[I * m + A] *
                           dr[(((Mi * m + A) * m + J) * m + K) * m + L] *
                           dir_phi[Mi] * B[J][L];
            for (int J = 0; J < m; ++J)
              for (int L = 0; L < m; ++L) {
                const real r = rup[((I * m + J) * m + K) * m + L];
                if (r != 0.0)
                  e += r * (pair_indef(dpsJ[J], ps[L]) + pair_indef(ps[J], dpsJ[L]));
              }
            out_E[I][K] = e;
          }
      };

      cplx Edir[3][3];
      grad_E(pi_p, ch, Edir);  // nabla_t E (psi-derivative slot is chi)
      Spinor Ut[3];
      for (int I = 0; I < m; ++I) {
        Ut[I] = {cplx(0.0), cplx(0.0)};
        for (int K = 0; K < m; ++K)
          Ut[I] += (W.dwt[p] * E[I][K] + W.w2[p] * Edir[I][K]) * ps[K];
      }
      Spinor Ui[2][3];
      for (int i = 0; i < d; ++i) {
        grad_E(dph + i * m, dps[i], Edir);
        for (int I = 0; I < m; ++I) {
          Ui[i][I] = {cplx(0.0), cplx(0.0)};
          for (int K = 0; K < m; ++K)
            Ui[i][I] += (W.dwx[p * d + i] * E[I][K] + W.w2[p] * Edir[I][K]) * ps[K];
        }
      }
      // signs of the (i/3) and (1/9) blocks are the ones forced by applying
      // i*Dslash to the first-order equation; only these propagate the Dirac
      // constraint (checked at order-jump resolution in the acceptance suite)
      for (int I = 0; I < m; ++I) {
        Spinor v = (-s) * (M.frame.gamma0 * Ut[I]);
        for (int i = 0; i < d; ++i) v += ainv * (M.frame.gamma_sp[i] * Ui[i][I]);
        rhs[I] += cplx(0.0, -1.0 / 3.0) * v;
      }

      // -(1/9) (Ns)^{4-2n} E^2 psi
      Spinor Eps[3];
      for (int J = 0; J < m; ++J) {
        Eps[J] = {cplx(0.0), cplx(0.0)};
        for (int K = 0; K < m; ++K) Eps[J] += E[J][K] * ps[K];
      }
      for (int I = 0; I < m; ++I) {
        Spinor acc{cplx(0.0), cplx(0.0)};
        for (int J = 0; J < m; ++J) acc += E[I][J] * Eps[J];
        rhs[I] += (-W.w4[p] / 9.0) * acc;
      }
    }

    for (int I = 0; I < m; ++I) {
      Spinor v = (-s * sd) * ch[I] + (-s * s * (n - 1) * hub) * ch[I] +
                 (-1.0) * spinor_at(box_sp_psi, p * m + I) + rhs[I];
      spinor_set(out.ddpsi, p * m + I, sinv2 * v);
    }
  }
  return out;
}

namespace {

void apply_deriv(FieldState& s, real c, const StateDeriv& k) {
  for (std::size_t i = 0; i < s.phi.size(); ++i) s.phi[i] += c * k.dphi[i];
  for (std::size_t i = 0; i < s.pi.size(); ++i) s.pi[i] += c * k.dpi[i];
  for (std::size_t i = 0; i < s.psi.size(); ++i) s.psi[i] += c * k.dpsi[i];
  for (std::size_t i = 0; i < s.chi.size(); ++i) s.chi[i] += c * k.dchi[i];
}

}  // namespace

StateDeriv coordinate_deriv(const Model& M, const FieldState& fs, real* max_radius) {
  RhsResult r = covariant_rhs(M, fs);
  if (max_radius && r.tt.max_radius > *max_radius) *max_radius = r.tt.max_radius;
  const std::size_t P = M.grid.size();
  const int m = fs.m;
  StateDeriv k;
  k.dphi = fs.pi;
  k.dpi = std::move(r.ddphi);
  k.dpsi.assign(P * m * 2, cplx(0.0, 0.0));
  k.dchi = std::move(r.ddpsi);
  if (r.tt.flat) {
    k.dpsi = fs.chi;
    return k;
  }
  for (std::size_t p = 0; p < P; ++p) {
    const real* gam = r.tt.gam_at(p);
    const real* pi_p = fs.pi.data() + p * m;
    for (int I = 0; I < m; ++I) {
      real corr = 0.0;
      Spinor cpsi{cplx(0.0), cplx(0.0)}, cchi{cplx(0.0), cplx(0.0)};
      for (int J = 0; J < m; ++J)
        for (int K = 0; K < m; ++K) {
          const real gjk = gam[(I * m + J) * m + K] * pi_p[J];
          if (gjk == 0.0) continue;
          corr += gjk * pi_p[K];
          cpsi += gjk * spinor_at(fs.psi, p * m + K);
          cchi += gjk * spinor_at(fs.chi, p * m + K);
        }
      k.dpi[p * m + I] -= corr;
      spinor_set(k.dpsi, p * m + I, spinor_at(fs.chi, p * m + I) - cpsi);
      const Spinor cur = spinor_at(k.dchi, p * m + I);
      spinor_set(k.dchi, p * m + I, cur - cchi);
    }
  }
  return k;
}

FieldState rk4_step(const Model& M, const FieldState& fs, real dt, real* max_radius) {
  auto stage = [&](real c, const StateDeriv& k, real tnew) {
    FieldState s2 = fs;
    apply_deriv(s2, c, k);
    s2.t = tnew;
    return s2;
  };
  const StateDeriv k1 = coordinate_deriv(M, fs, max_radius);
  const FieldState s2 = stage(dt / 2, k1, fs.t + dt / 2);
  const StateDeriv k2 = coordinate_deriv(M, s2, max_radius);
  const FieldState s3 = stage(dt / 2, k2, fs.t + dt / 2);
  const StateDeriv k3 = coordinate_deriv(M, s3, max_radius);
  const FieldState s4 = stage(dt, k3, fs.t + dt);
  const StateDeriv k4 = coordinate_deriv(M, s4, max_radius);
  FieldState out = fs;
  out.t = fs.t + dt;
  apply_deriv(out, dt / 6, k1);
  apply_deriv(out, dt / 3, k2);
  apply_deriv(out, dt / 3, k3);
  apply_deriv(out, dt / 6, k4);
  out.check_finite();
  return out;
}

real cfl_dt(const Model& M, real t, real cfl, real dt_max) {
  const real s = M.st.s.value(t);
  return std::min(dt_max, cfl * s * M.a_min() * M.grid.dx());
}

std::vector<cplx> dirac_apply(const Model& M, const FieldState& fs) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int d = g.nsp, m = fs.m;
  const real s = M.st.s.value(fs.t), ainv = 1.0 / M.st.a.value(fs.t);
  const TargetTables tt = build_tables(M.chart, fs.phi, P, fs.t);
  const std::vector<real> dphi = all_partials(g, fs.phi, m);
  const std::array<Mat2, 2> omega = spin_connection(M.frame, M.st, fs.t);
  const std::vector<cplx> Dpsi = apply_D_spin(g, tt, dphi, omega, fs.psi, 1);
  std::vector<cplx> out(P * m * 2, cplx(0.0, 0.0));
  for (std::size_t p = 0; p < P; ++p)
    for (int I = 0; I < m; ++I) {
      Spinor v = (-s) * (M.frame.gamma0 * spinor_at(fs.chi, p * m + I));
      for (int i = 0; i < d; ++i)
        v += ainv * (M.frame.gamma_sp[i] * spinor_at(Dpsi, (p * d + i) * m + I));
      spinor_set(out, p * m + I, v);
    }
  return out;
}

std::vector<cplx> dirac_compatible_chi(const Model& M, const FieldState& fs) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int d = g.nsp, m = fs.m;
  const real s = M.st.s.value(fs.t), ainv = 1.0 / M.st.a.value(fs.t);
  const TargetTables tt = build_tables(M.chart, fs.phi, P, fs.t);
  const std::vector<real> dphi = all_partials(g, fs.phi, m);
  const std::array<Mat2, 2> omega = spin_connection(M.frame, M.st, fs.t);
  const std::vector<cplx> Dpsi = apply_D_spin(g, tt, dphi, omega, fs.psi, 1);
  const WeightTables W = conformal_weights(M, s, M.st.s.d1(fs.t));
  std::vector<cplx> out(P * m * 2, cplx(0.0, 0.0));
  cplx E[3][3];
  for (std::size_t p = 0; p < P; ++p) {
    endomorphism_E(tt, p, fs.psi, E);
    for (int I = 0; I < m; ++I) {
      Spinor S{cplx(0.0), cplx(0.0)};
      for (int i = 0; i < d; ++i)
        S += ainv * (M.frame.gamma_sp[i] * spinor_at(Dpsi, (p * d + i) * m + I));
      Spinor Q{cplx(0.0), cplx(0.0)};
      for (int K = 0; K < m; ++K) Q += E[I][K] * spinor_at(fs.psi, p * m + K);
      const Spinor v =
          (1.0 / s) * (M.frame.gamma0 * S) +
          (cplx(0.0, 1.0) * (W.w2[p] / (3.0 * s))) * (M.frame.gamma0 * Q);
      spinor_set(out, p * m + I, v);
    }
  }
  return out;
}

real dirac_residual(const Model& M, const FieldState& fs) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int m = fs.m, n = M.st.n;
  const real s = M.st.s.value(fs.t), a = M.st.a.value(fs.t);
  const TargetTables tt = build_tables(M.chart, fs.phi, P, fs.t);
  const std::vector<real> dphi = all_partials(g, fs.phi, m);
  const std::array<Mat2, 2> omega = spin_connection(M.frame, M.st, fs.t);
  const WeightTables W = conformal_weights(M, s, M.st.s.d1(fs.t));
  const std::vector<cplx> slash = dirac_apply(M, fs);
  std::vector<cplx> res(P * m * 2, cplx(0.0, 0.0));
  cplx E[3][3];
  for (std::size_t p = 0; p < P; ++p) {
    endomorphism_E(tt, p, fs.psi, E);
    for (int I = 0; I < m; ++I) {
      Spinor Q{cplx(0.0), cplx(0.0)};
      for (int K = 0; K < m; ++K) Q += E[I][K] * spinor_at(fs.psi, p * m + K);
      const Spinor r = cplx(0.0, 1.0) * spinor_at(slash, p * m + I) -
                       (W.w2[p] / 3.0) * Q;
      spinor_set(res, p * m + I, r);
    }
  }
  const real num = std::sqrt(l2_integral(g, a, n, density_spin(tt, res, 1, 1.0)));
  const real den = sobolev_norm_spin(g, tt, dphi, omega, fs.psi, 1, a, n) + 1e-30;
  return num / den;
}

FieldState make_initial_data(const Model& M, const InitParams& ip) {
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int d = g.nsp, m = M.chart.m, n = M.st.n;
  const int r = M.st.sobolev_r();
  const TVec y0 = M.chart.base_point();
  const bool spin = ip.spinor && M.spinor_on;

  std::mt19937_64 rng(ip.seed);
  auto u01 = [&rng] { return static_cast<real>(rng() >> 11) * 0x1.0p-53; };
  auto sym = [&] { return 2.0 * u01() - 1.0; };

  std::vector<real> dphi0(P * m, 0.0), pihat(P * m, 0.0);
  std::vector<cplx> psihat(P * m * 2, cplx(0.0, 0.0));

  const int kc = ip.mode_cutoff;
  if (kc < 0) throw ConfigError("init.mode_cutoff must be >= 0");
  std::vector<real> xs(P * 2, 0.0);
  for (std::size_t p = 0; p < P; ++p) g.coords(p, xs.data() + p * 2);

  const int klo = -kc;
  const int k2hi = (d == 1) ? 0 : kc;
  for (int k1 = klo; k1 <= kc; ++k1)
    for (int k2 = (d == 1 ? 0 : klo); k2 <= k2hi; ++k2) {
      const bool zero_mode = (k1 == 0 && k2 == 0);
      const real kk = static_cast<real>(k1 * k1 + k2 * k2);
      const real wgt = 1.0 / ((1.0 + kk) * (1.0 + kk));

      real ca[3] = {}, cb[3] = {}, pa[3] = {}, pb[3] = {};
      cplx sa[3][2] = {}, sb[3][2] = {};
      if (!zero_mode)
        for (int I = 0; I < m; ++I) {
          ca[I] = sym() * wgt;
          cb[I] = sym() * wgt;
        }
      for (int I = 0; I < m; ++I) {
        pa[I] = sym() * wgt;
        if (!zero_mode) pb[I] = sym() * wgt;
      }
      if (spin)
        for (int I = 0; I < m; ++I)
          for (int c = 0; c < 2; ++c) {
            sa[I][c] = cplx(sym(), sym()) * wgt;
            if (!zero_mode) sb[I][c] = cplx(sym(), sym()) * wgt;
          }

      for (std::size_t p = 0; p < P; ++p) {
        const real ph = k1 * xs[p * 2] + k2 * xs[p * 2 + 1];
        const real cs = std::cos(ph), sn = std::sin(ph);
        for (int I = 0; I < m; ++I) {
          dphi0[p * m + I] += ca[I] * cs + cb[I] * sn;
          pihat[p * m + I] += pa[I] * cs + pb[I] * sn;
          if (spin)
            for (int c = 0; c < 2; ++c)
              psihat[(p * m + I) * 2 + c] += sa[I][c] * cs + sb[I][c] * sn;
        }
      }
    }

  const real a0 = M.st.a.value(0.0);
  const std::array<Mat2, 2> omega = spin_connection(M.frame, M.st, 0.0);
  FieldState st = FieldState::zeros(P, m);

  auto assemble = [&](real lam) {
    for (std::size_t p = 0; p < P; ++p)
      for (int I = 0; I < m; ++I) {
        st.phi[p * m + I] = y0[I] + lam * dphi0[p * m + I];
        st.pi[p * m + I] = lam * pihat[p * m + I];
      }
    for (std::size_t i = 0; i < psihat.size(); ++i) st.psi[i] = lam * psihat[i];
  };
  auto norm_of = [&](real lam) {
    assemble(lam);
    const TargetTables tt = build_tables(M.chart, st.phi, P, 0.0);
    const std::vector<real> dphi = all_partials(g, st.phi, m);
    std::vector<real> u(P * m);
    for (std::size_t p = 0; p < P; ++p)
      for (int I = 0; I < m; ++I) u[p * m + I] = st.phi[p * m + I] - y0[I];
    real T = sobolev_norm_map(g, tt, dphi, u, r + 1, a0, n) +
             sobolev_norm_map(g, tt, dphi, st.pi, r, a0, n);
    if (spin) T += sobolev_norm_spin(g, tt, dphi, omega, st.psi, r, a0, n);
    return T;
  };

  if (ip.epsilon < 0.0) throw ConfigError("init.epsilon must be >= 0");
  if (ip.epsilon == 0.0) {  // constant map, zero momentum/spinor
    assemble(0.0);
    st.t = 0.0;
    return st;
  }
  const real tgt = ip.epsilon / 2.0;
  // oversized epsilon can push phi out of the chart mid-calibration; the
  // resulting ChartExit is the caller's abort path, not a config error
  real lam = 1e-3;
  real T = norm_of(lam);
  if (T < 1e-300) throw ConfigError("initial data draw is identically zero");
  for (int it = 0; it < 50; ++it) {
    lam *= tgt / T;
    T = norm_of(lam);
    if (std::abs(T - tgt) <= 1e-13 * tgt) break;
  }
  assemble(lam);
  st.t = 0.0;
  st.chi = dirac_compatible_chi(M, st);
  return st;
}

}  // namespace dwm
