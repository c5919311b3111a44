#include "dwm/fields.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace dwm {

FieldState FieldState::zeros(std::size_t npoints, int m_) {
  FieldState st;
  st.m = m_;
  st.phi.assign(npoints * m_, 0.0);
  st.pi.assign(npoints * m_, 0.0);
  st.psi.assign(npoints * m_ * 2, cplx(0.0, 0.0));
  st.chi.assign(npoints * m_ * 2, cplx(0.0, 0.0));
  return st;
}

void FieldState::check_finite() const {
  for (real v : phi)
    if (!std::isfinite(v)) throw NumericalAbort(t, "phi stopped being finite");
  for (real v : pi)
    if (!std::isfinite(v)) throw NumericalAbort(t, "pi stopped being finite");
  for (const cplx& v : psi)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalAbort(t, "psi stopped being finite");
  for (const cplx& v : chi)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalAbort(t, "chi stopped being finite");
}

void state_axpy(FieldState& u, real c, const FieldState& v) {
  for (std::size_t i = 0; i < u.phi.size(); ++i) u.phi[i] += c * v.phi[i];
  for (std::size_t i = 0; i < u.pi.size(); ++i) u.pi[i] += c * v.pi[i];
  for (std::size_t i = 0; i < u.psi.size(); ++i) u.psi[i] += c * v.psi[i];
  for (std::size_t i = 0; i < u.chi.size(); ++i) u.chi[i] += c * v.chi[i];
}

TargetTables build_tables(const TargetChart& chart, const std::vector<real>& phi,
                          std::size_t P, real t) {
  TargetTables tt;
  const int m = chart.m;
  tt.m = m;
  tt.P = P;
  tt.flat = chart.flat_geometry();
  tt.has_gradR = chart.has_grad_curvature();
  tt.G.assign(P * m * m, 0.0);
  tt.Gi.assign(P * m * m, 0.0);
  tt.Gam.assign(P * m * m * m, 0.0);
  tt.Rup.assign(P * m * m * m * m, 0.0);
  tt.Rlow.assign(P * m * m * m * m, 0.0);
  if (tt.has_gradR) tt.dR.assign(P * m * m * m * m * m, 0.0);

  for (std::size_t p = 0; p < P; ++p) {
    const real* y = phi.data() + p * m;
    if (!chart.admissible(y)) {
      std::ostringstream os;
      os << "map left the chart at t = " << t << " (y = " << y[0];
      for (int I = 1; I < m; ++I) os << ", " << y[I];
      os << ")";
      throw ChartExit(t, os.str());
    }
    real rad = 0.0;
    if (chart.kind == TargetKind::warped_surface) {
      rad = y[0];
    } else {
      real s2 = 0.0;
      for (int I = 0; I < m; ++I) s2 += y[I] * y[I];
      rad = std::sqrt(s2);
    }
    if (rad > tt.max_radius) tt.max_radius = rad;

    if (tt.flat) {
      for (int I = 0; I < m; ++I) {
        tt.G[(p * m + I) * m + I] = 1.0;
        tt.Gi[(p * m + I) * m + I] = 1.0;
      }
      continue;
    }
    const TargetGeom tg = target_geometry(chart, y);
    for (int I = 0; I < m; ++I)
      for (int J = 0; J < m; ++J) {
        tt.G[(p * m + I) * m + J] = tg.G[I][J];
        tt.Gi[(p * m + I) * m + J] = tg.Gi[I][J];
        for (int K = 0; K < m; ++K) {
          tt.Gam[((p * m + I) * m + J) * m + K] = tg.Gam[I][J][K];
          for (int L = 0; L < m; ++L) {
            tt.Rup[(((p * m + I) * m + J) * m + K) * m + L] = tg.Rup[I][J][K][L];
            tt.Rlow[(((p * m + I) * m + J) * m + K) * m + L] = tg.R[I][J][K][L];
            if (tt.has_gradR)
              for (int M = 0; M < m; ++M)
                tt.dR[((((p * m + M) * m + I) * m + J) * m + K) * m + L] =
                    tg.dR[M][I][J][K][L];
          }
        }
      }
  }
  return tt;
}

template <typename T>
std::vector<T> all_partials(const Grid& g, const std::vector<T>& in, int comps) {
  const std::size_t P = g.size();
  const int d = g.nsp;
  std::vector<T> out(P * d * comps);
  std::vector<T> tmp(P * comps);
  for (int dir = 0; dir < d; ++dir) {
    fd_partial(g, in.data(), tmp.data(), dir, comps);
    for (std::size_t p = 0; p < P; ++p)
      std::memcpy(out.data() + (p * d + dir) * comps, tmp.data() + p * comps,
                  sizeof(T) * comps);
  }
  return out;
}

template std::vector<real> all_partials<real>(const Grid&, const std::vector<real>&, int);
template std::vector<cplx> all_partials<cplx>(const Grid&, const std::vector<cplx>&, int);

std::vector<real> apply_D_map(const Grid& g, const TargetTables& tt,
                              const std::vector<real>& dphi,
                              const std::vector<real>& in, int nslots) {
  const std::size_t P = g.size();
  const int d = g.nsp;
  const int m = tt.m;
  const int comps = nslots * m;
  std::vector<real> out = all_partials(g, in, comps);  // layout (p*d + i)*comps already
  if (tt.flat) return out;
  for (std::size_t p = 0; p < P; ++p) {
    const real* gam = tt.gam_at(p);
    for (int i = 0; i < d; ++i) {
      const real* dph = dphi.data() + (p * d + i) * m;
      real* o = out.data() + (p * d + i) * static_cast<std::size_t>(comps);
      const real* v = in.data() + p * static_cast<std::size_t>(comps);
      for (int s = 0; s < nslots; ++s)
        for (int I = 0; I < m; ++I) {
          real acc = 0.0;
          for (int J = 0; J < m; ++J)
            for (int K = 0; K < m; ++K)
              acc += gam[(I * m + J) * m + K] * dph[J] * v[s * m + K];
          o[s * m + I] += acc;
        }
    }
  }
  return out;
}

std::vector<cplx> apply_D_spin(const Grid& g, const TargetTables& tt,
                               const std::vector<real>& dphi,
                               const std::array<Mat2, 2>& omega,
                               const std::vector<cplx>& in, int nslots) {
  const std::size_t P = g.size();
  const int d = g.nsp;
  const int m = tt.m;
  const int comps = nslots * m * 2;
  std::vector<cplx> out = all_partials(g, in, comps);
  for (std::size_t p = 0; p < P; ++p) {
    const real* gam = tt.flat ? nullptr : tt.gam_at(p);
    for (int i = 0; i < d; ++i) {
      const real* dph = dphi.data() + (p * d + i) * m;
      const std::size_t obase = (p * d + i) * static_cast<std::size_t>(nslots * m);
      const std::size_t vbase = p * static_cast<std::size_t>(nslots * m);
      for (int s = 0; s < nslots; ++s)
        for (int I = 0; I < m; ++I) {
          Spinor acc = omega[i] * spinor_at(in, vbase + s * m + I);
          if (gam)
            for (int J = 0; J < m; ++J)
              for (int K = 0; K < m; ++K) {
                const real c = gam[(I * m + J) * m + K] * dph[J];
                if (c != 0.0) {
                  const Spinor w = spinor_at(in, vbase + s * m + K);
                  acc[0] += c * w[0];
                  acc[1] += c * w[1];
                }
              }
          spinor_add(out, obase + s * m + I, acc);
        }
    }
  }
  return out;
}

template <typename T>
std::vector<T> dstar_contract(const Grid& g, const std::vector<T>& Dxi,
                              int nslots_xi, int comps, real ainv2) {
  const std::size_t P = g.size();
  const int d = g.nsp;
  const int srest = nslots_xi / d;
  std::vector<T> out(P * srest * comps, T(0));
  for (std::size_t p = 0; p < P; ++p)
    for (int i = 0; i < d; ++i) {
      const T* src = Dxi.data() +
                     ((p * d + i) * static_cast<std::size_t>(nslots_xi) + i * srest) * comps;
      T* o = out.data() + p * static_cast<std::size_t>(srest) * comps;
      for (int c = 0; c < srest * comps; ++c) o[c] -= ainv2 * src[c];
    }
  return out;
}

template std::vector<real> dstar_contract<real>(const Grid&, const std::vector<real>&, int, int, real);
template std::vector<cplx> dstar_contract<cplx>(const Grid&, const std::vector<cplx>&, int, int, real);

std::vector<real> dstar_d_map(const Grid& g, const TargetTables& tt,
                              const std::vector<real>& dphi,
                              const std::vector<real>& in, int nslots, real ainv2) {
  std::vector<real> D1 = apply_D_map(g, tt, dphi, in, nslots);
  std::vector<real> D2 = apply_D_map(g, tt, dphi, D1, g.nsp * nslots);
  return dstar_contract(g, D2, g.nsp * nslots, tt.m, ainv2);
}

std::vector<cplx> dstar_d_spin(const Grid& g, const TargetTables& tt,
                               const std::vector<real>& dphi,
                               const std::array<Mat2, 2>& omega,
                               const std::vector<cplx>& in, int nslots, real ainv2) {
  std::vector<cplx> D1 = apply_D_spin(g, tt, dphi, omega, in, nslots);
  std::vector<cplx> D2 = apply_D_spin(g, tt, dphi, omega, D1, g.nsp * nslots);
  return dstar_contract(g, D2, g.nsp * nslots, tt.m * 2, ainv2);
}

std::vector<real> pair_density_map(const TargetTables& tt, const std::vector<real>& u,
                                   const std::vector<real>& v, int nslots, real slot_weight) {
  const std::size_t P = tt.P;
  const int m = tt.m;
  std::vector<real> out(P, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    const real* gm = tt.g_at(p);
    const real* up = u.data() + p * static_cast<std::size_t>(nslots * m);
    const real* vp = v.data() + p * static_cast<std::size_t>(nslots * m);
    real acc = 0.0;
    for (int s = 0; s < nslots; ++s)
      for (int I = 0; I < m; ++I)
        for (int J = 0; J < m; ++J)
          acc += gm[I * m + J] * up[s * m + I] * vp[s * m + J];
    out[p] = slot_weight * acc;
  }
  return out;
}

std::vector<real> pair_density_spin(const TargetTables& tt, const std::vector<cplx>& u,
                                    const std::vector<cplx>& v, int nslots, real slot_weight) {
  const std::size_t P = tt.P;
  const int m = tt.m;
  std::vector<real> out(P, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    const real* gm = tt.g_at(p);
    const std::size_t base = p * static_cast<std::size_t>(nslots * m);
    real acc = 0.0;
    for (int s = 0; s < nslots; ++s)
      for (int I = 0; I < m; ++I)
        for (int J = 0; J < m; ++J) {
          const real w = gm[I * m + J];
          if (w == 0.0) continue;
          const std::size_t a = base + s * m + I, b = base + s * m + J;
          acc += w * std::real(std::conj(u[2 * a]) * v[2 * b] +
                               std::conj(u[2 * a + 1]) * v[2 * b + 1]);
        }
    out[p] = slot_weight * acc;
  }
  return out;
}

real sobolev_norm_map(const Grid& g, const TargetTables& tt, const std::vector<real>& dphi,
                      const std::vector<real>& u, int order, real a_of_t, int n) {
  const real ainv2 = 1.0 / (a_of_t * a_of_t);
  real acc = 0.0;
  std::vector<real> cur = u;
  int nslots = 1;
  real w = 1.0;
  for (int k = 0; k <= order; ++k) {
    acc += l2_integral(g, a_of_t, n, density_map(tt, cur, nslots, w));
    if (k == order) break;
    cur = apply_D_map(g, tt, dphi, cur, nslots);
    nslots *= g.nsp;
    w *= ainv2;
  }
  return std::sqrt(acc);
}

real sobolev_norm_spin(const Grid& g, const TargetTables& tt, const std::vector<real>& dphi,
                       const std::array<Mat2, 2>& omega, const std::vector<cplx>& u,
                       int order, real a_of_t, int n) {
  const real ainv2 = 1.0 / (a_of_t * a_of_t);
  real acc = 0.0;
  std::vector<cplx> cur = u;
  int nslots = 1;
  real w = 1.0;
  for (int k = 0; k <= order; ++k) {
    acc += l2_integral(g, a_of_t, n, density_spin(tt, cur, nslots, w));
    if (k == order) break;
    cur = apply_D_spin(g, tt, dphi, omega, cur, nslots);
    nslots *= g.nsp;
    w *= ainv2;
  }
  return std::sqrt(acc);
}

real l2_integral(const Grid& g, real a_of_t, int n, const std::vector<real>& density) {
  real cell = 1.0;
  for (int d = 0; d < g.nsp; ++d) cell *= g.dx();
  real vol = cell;
  for (int d = 0; d < n - 1; ++d) vol *= a_of_t;
  real acc = 0.0;
  for (real v : density) acc += v;
  return acc * vol;
}

}  // namespace dwm
