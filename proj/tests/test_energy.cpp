#include "dwm/energy.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"

using namespace dwm;
using dwmtest::rel;
using dwmtest::Rng;

namespace {

Model static_flat(int npts, int order) {
  Model M;
  M.st.n = 2;
  M.st.s = Profile::constant(1.0);
  M.st.a = Profile::constant(1.0);
  M.chart.kind = TargetKind::flat;
  M.chart.m = 2;
  M.grid = Grid{1, npts, order};
  M.frame = SpinFrame::standard(2);
  M.validate();
  return M;
}

Model sphere3(int npts, int order) {
  Model M;
  M.st.n = 3;
  M.st.s = Profile::constant(1.3);
  M.st.a = Profile::constant(0.9);
  M.grid = Grid{2, npts, order};
  M.frame = SpinFrame::standard(3);
  M.validate();
  return M;
}

std::vector<real> trig_real(const Grid& g, int m, const TVec& base, real amp, Rng& rng) {
  std::vector<real> out(g.size() * m);
  real x[2] = {0.0, 0.0};
  for (int I = 0; I < m; ++I) {
    const real a1 = amp * rng.sym(), a2 = amp * rng.sym();
    const real th = 6.28 * rng.u01();
    const int k1 = 1 + int(rng.u01() * 2.9);
    const int k2 = g.nsp == 1 ? 0 : 1 + int(rng.u01() * 1.9);
    for (std::size_t p = 0; p < g.size(); ++p) {
      g.coords(p, x);
      out[p * m + I] =
          base[I] + a1 * std::cos(k1 * x[0] + th) + a2 * std::sin(k2 * x[1] + k1 * x[0]);
    }
  }
  return out;
}

std::vector<cplx> trig_cplx(const Grid& g, int m, real amp, Rng& rng) {
  std::vector<cplx> out(g.size() * m * 2);
  real x[2] = {0.0, 0.0};
  for (int I = 0; I < m; ++I)
    for (int c = 0; c < 2; ++c) {
      const cplx a1(amp * rng.sym(), amp * rng.sym());
      const cplx a2(amp * rng.sym(), amp * rng.sym());
      const int k1 = 1 + int(rng.u01() * 2.9);
      const int k2 = g.nsp == 1 ? 0 : int(rng.u01() * 2.9);
      for (std::size_t p = 0; p < g.size(); ++p) {
        g.coords(p, x);
        out[(p * m + I) * 2 + c] =
            a1 * std::cos(k1 * x[0]) + a2 * std::sin(k1 * x[0] + k2 * x[1]);
      }
    }
  return out;
}

FieldState random_state(const Model& M, Rng& rng, real map_amp, real spin_amp) {
  FieldState fs = FieldState::zeros(M.grid.size(), M.chart.m);
  fs.phi = trig_real(M.grid, M.chart.m, M.chart.base_point(), map_amp, rng);
  fs.pi = trig_real(M.grid, M.chart.m, TVec{0.0, 0.0, 0.0}, map_amp, rng);
  fs.psi = trig_cplx(M.grid, M.chart.m, spin_amp, rng);
  fs.chi = trig_cplx(M.grid, M.chart.m, spin_amp, rng);
  return fs;
}

}  // namespace

TEST_CASE("zero state: every report entry is exactly zero") {
  Model M = sphere3(8, 2);
  const FieldState fs = FieldState::zeros(M.grid.size(), M.chart.m);
  const EnergyReport er = total_energy(M, fs);
  for (real e : er.e_map) CHECK(e == 0.0);
  for (real e : er.e_spin) CHECK(e == 0.0);
  CHECK(er.psi_l2 == 0.0);
  CHECK(er.f_map == 0.0);
  CHECK(er.f_spin == 0.0);
  CHECK(er.f_total == 0.0);
}

TEST_CASE("travelling wave on the unit static background integrates to 2*pi") {
  Model M = static_flat(4096, 4);
  M.spinor_on = false;
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int m = M.chart.m;
  FieldState fs = FieldState::zeros(P, m);
  fs.t = 0.3;
  real x[2];
  for (std::size_t p = 0; p < P; ++p) {
    g.coords(p, x);
    fs.phi[p * m] = std::sin(x[0] - fs.t);
    fs.pi[p * m] = -std::cos(x[0] - fs.t);
  }
  const EnergyReport er = total_energy(M, fs);
  CHECK(std::abs(er.e_map[0] - 2.0 * Grid::pi()) < 1e-10);
}

TEST_CASE("constant-in-space state: k >= 1 energies vanish identically") {
  Model M = sphere3(8, 2);
  M.chart.kind = TargetKind::flat;
  M.chart.m = 2;
  M.spinor_on = false;
  M.validate();
  const std::size_t P = M.grid.size();
  FieldState fs = FieldState::zeros(P, 2);
  const real c0 = 0.37, c1 = -0.81;
  for (std::size_t p = 0; p < P; ++p) {
    fs.pi[p * 2] = c0;
    fs.pi[p * 2 + 1] = c1;
  }
  const EnergyReport er = total_energy(M, fs);
  CHECK(er.e_map[1] == 0.0);
  CHECK(er.e_map[2] == 0.0);
  const real s = M.st.s.value(0.0), a = M.st.a.value(0.0);
  const real vol = std::pow(2.0 * Grid::pi(), 2) * a * a;
  CHECK(rel(er.e_map[0], s * s * (c0 * c0 + c1 * c1) * vol) < 1e-13);
}

TEST_CASE("spinor densities are pointwise nonnegative") {
  Model M = sphere3(10, 2);
  Rng rng(3);
  FieldState fs = random_state(M, rng, 0.4, 0.6);
  const std::size_t P = M.grid.size();
  const int m = M.chart.m, d = M.grid.nsp;
  const real a = M.st.a.value(0.0), ainv2 = 1.0 / (a * a);

  const TargetTables tt = build_tables(M.chart, fs.phi, P, 0.0);
  const auto dphi = all_partials(M.grid, fs.phi, m);
  const auto om = spin_connection(M.frame, M.st, 0.0);
  const auto Dpsi = apply_D_spin(M.grid, tt, dphi, om, fs.psi, 1);

  real mn = 0.0;
  for (real v : density_spin(tt, fs.chi, 1, 1.0)) mn = std::min(mn, v);
  for (real v : density_spin(tt, Dpsi, d, ainv2)) mn = std::min(mn, v);
  for (real v : density_spin(tt, fs.psi, 1, 1.0)) mn = std::min(mn, v);
  CHECK(mn >= -1e-14);

  const EnergyReport er = total_energy(M, fs);
  for (real e : er.e_map) CHECK(e >= 0.0);
  for (real e : er.e_spin) CHECK(e >= 0.0);
  CHECK(er.psi_l2 >= 0.0);
}

TEST_CASE("spinor energies are quadratically homogeneous") {
  Model M = sphere3(10, 2);
  Rng rng(7);
  FieldState fs = random_state(M, rng, 0.3, 0.5);
  FieldState fs2 = fs;
  for (auto& z : fs2.psi) z *= 2.0;
  for (auto& z : fs2.chi) z *= 2.0;
  const EnergyReport e1 = total_energy(M, fs);
  const EnergyReport e2 = total_energy(M, fs2);
  for (std::size_t k = 0; k < e1.e_spin.size(); ++k)
    CHECK(rel(e2.e_spin[k], 4.0 * e1.e_spin[k]) < 1e-12);
  CHECK(rel(e2.psi_l2, 4.0 * e1.psi_l2) < 1e-12);
  for (std::size_t k = 0; k < e1.e_map.size(); ++k) CHECK(e2.e_map[k] == e1.e_map[k]);
}

TEST_CASE("spinor-free state: F_total collapses to the wave-map energy") {
  Model M = sphere3(10, 2);
  Rng rng(13);
  FieldState fs = random_state(M, rng, 0.4, 0.0);
  for (auto& z : fs.psi) z = cplx(0.0, 0.0);
  for (auto& z : fs.chi) z = cplx(0.0, 0.0);
  const EnergyReport er = total_energy(M, fs);
  CHECK(er.f_spin == 0.0);
  CHECK(er.psi_l2 == 0.0);
  CHECK(er.f_total == er.f_map);
  CHECK(er.f_map > 0.0);
}

TEST_CASE("F_map assembled two ways agrees") {
  Model M = sphere3(12, 2);
  M.spinor_on = false;
  Rng rng(17);
  FieldState fs = random_state(M, rng, 0.35, 0.0);
  const EnergyReport er = total_energy(M, fs);

  // route 1: the report's own partial sums
  real acc = 0.0;
  for (real e : er.e_map) acc += e;
  CHECK(er.f_map == acc);  // exactly as summed

  // route 2: covariant Sobolev norms, gradient part sliced per direction
  const Grid& g = M.grid;
  const std::size_t P = g.size();
  const int m = M.chart.m, d = g.nsp, r = M.st.sobolev_r();
  const real s = M.st.s.value(0.0), a = M.st.a.value(0.0), ainv2 = 1.0 / (a * a);
  const TargetTables tt = build_tables(M.chart, fs.phi, P, 0.0);
  const auto dphi = all_partials(g, fs.phi, m);

  const real npi = sobolev_norm_map(g, tt, dphi, fs.pi, r, a, M.st.n);
  real f2 = s * s * npi * npi;
  for (int i = 0; i < d; ++i) {
    std::vector<real> slice(P * m);
    for (std::size_t p = 0; p < P; ++p)
      for (int I = 0; I < m; ++I) slice[p * m + I] = dphi[(p * d + i) * m + I];
    const real ns = sobolev_norm_map(g, tt, dphi, slice, r, a, M.st.n);
    f2 += ainv2 * ns * ns;
  }
  CHECK(rel(er.f_map, f2) < 1e-12);
}

TEST_CASE("gronwall_check: conserved, injected-growth, and oversized data") {
  WarpedSpacetime st;
  st.n = 3;
  st.s = Profile::constant(1.0);
  st.a = Profile::constant(1.0);
  st.horizon = 10.0;
  st.validate();

  // static conserved series
  {
    std::vector<real> ts, phis, F;
    for (int j = 0; j <= 100; ++j) {
      const real t = 0.1 * j;
      ts.push_back(t);
      phis.push_back(t);  // s = 1, a const: Phi(t) = t
      F.push_back(0.5);
    }
    const GronwallResult gr = gronwall_check(st, ts, phis, F, 10.0);
    CHECK(gr.verdict == "pass");
    CHECK(gr.sinv_divergent);  // int 1/s diverges on s = const
    CHECK(gr.max_ratio <= 1.0 + 1e-12);
    CHECK(gr.c_hat >= 0.0);
  }

  // injected exponential growth on the flagged background: the fitted rate
  // undershoots (arithmetic-midpoint differencing), so the bound breaks
  {
    std::vector<real> ts, phis, F;
    for (int j = 0; j <= 100; ++j) {
      ts.push_back(real(j));
      phis.push_back(real(j));
      F.push_back(std::exp(real(j)));
    }
    const GronwallResult gr = gronwall_check(st, ts, phis, F, 100.0);
    CHECK(gr.verdict == "fail");
    CHECK(gr.c_hat < 1.0);
    CHECK(gr.max_ratio > 2.0);
  }

  // outside the bootstrap region
  {
    std::vector<real> ts{0.0, 1.0, 2.0}, phis{0.0, 1.0, 2.0}, F{1.5, 1.5, 1.5};
    const GronwallResult gr = gronwall_check(st, ts, phis, F, 2.0);
    CHECK(gr.verdict == "not_applicable");
  }
}

// k = 0 energy-evolution identity, joint (h, dt) refinement.  On solutions the
// continuum rate reduces to
//   n = 2:  dE0/dt = -(adot/a) E0
//   n = 3:  dE0/dt = -2 (adot/a) s^2 \int |pi|^2 dV
// (the a^{-2} gradient weight contributes (n-3), the measure (n-1)).
TEST_CASE("map k=0 energy-evolution identity under joint refinement") {
  auto resid_n2 = [](int npts) {
    Model M;
    M.st.n = 2;
    M.st.s = Profile::constant(1.0);
    M.st.a = Profile::oscillating(0.2, 1.0, 1.0);
    M.grid = Grid{1, npts, 2};
    M.frame = SpinFrame::standard(2);
    M.spinor_on = false;
    M.validate();
    const Grid& g = M.grid;
    const std::size_t P = g.size();
    const int m = M.chart.m;

    FieldState fs = FieldState::zeros(P, m);
    real x[2];
    for (std::size_t p = 0; p < P; ++p) {
      g.coords(p, x);
      fs.phi[p * m] = 0.25 * std::sin(x[0]);
      fs.phi[p * m + 1] = 0.15 * std::cos(2.0 * x[0]);
      fs.pi[p * m] = 0.2 * std::cos(x[0]);
      fs.pi[p * m + 1] = -0.1 * std::sin(x[0]);
    }

    const real dt = 0.4 / npts;
    const int steps = npts / 2;  // t1 = 0.2
    for (int j = 0; j < steps - 1; ++j) fs = rk4_step(M, fs, dt);
    const real em = total_energy(M, fs).e_map[0];
    fs = rk4_step(M, fs, dt);
    const real e0 = total_energy(M, fs).e_map[0];
    const real t1 = fs.t;
    fs = rk4_step(M, fs, dt);
    const real ep = total_energy(M, fs).e_map[0];

    const real hub = M.st.a.d1(t1) / M.st.a.value(t1);
    return std::abs((ep - em) / (2.0 * dt) + hub * e0);
  };

  const real r32 = resid_n2(32), r64 = resid_n2(64), r128 = resid_n2(128);
  CHECK(std::log2(r32 / r64) > 1.8);
  CHECK(std::log2(r64 / r128) > 1.8);

  auto resid_n3 = [](int npts) {
    Model M;
    M.st.n = 3;
    M.st.s = Profile::constant(1.0);
    M.st.a = Profile::oscillating(0.2, 1.0, 1.0);
    M.grid = Grid{2, npts, 2};
    M.frame = SpinFrame::standard(3);
    M.spinor_on = false;
    M.validate();
    const Grid& g = M.grid;
    const std::size_t P = g.size();
    const int m = M.chart.m;

    FieldState fs = FieldState::zeros(P, m);
    real x[2];
    for (std::size_t p = 0; p < P; ++p) {
      g.coords(p, x);
      fs.phi[p * m] = 0.2 * std::sin(x[0]) + 0.1 * std::cos(x[1]);
      fs.phi[p * m + 1] = 0.15 * std::sin(x[0] + x[1]);
      fs.pi[p * m] = 0.1 * std::cos(x[1]);
      fs.pi[p * m + 1] = -0.1 * std::sin(x[0]);
    }

    const real dt = 0.6 / npts;
    const int steps = npts / 3;  // t1 = 0.2
    for (int j = 0; j < steps - 1; ++j) fs = rk4_step(M, fs, dt);
    const real em = total_energy(M, fs).e_map[0];
    fs = rk4_step(M, fs, dt);
    const real t1 = fs.t;

    const real s = M.st.s.value(t1), a = M.st.a.value(t1);
    const TargetTables tt = build_tables(M.chart, fs.phi, P, t1);
    const real pisq =
        s * s * l2_integral(g, a, M.st.n, density_map(tt, fs.pi, 1, 1.0));

    fs = rk4_step(M, fs, dt);
    const real ep = total_energy(M, fs).e_map[0];

    const real hub = M.st.a.d1(t1) / M.st.a.value(t1);
    return std::abs((ep - em) / (2.0 * dt) + 2.0 * hub * pisq);
  };

  const real q12 = resid_n3(12), q24 = resid_n3(24);
  CHECK(std::log2(q12 / q24) > 1.8);
}

TEST_CASE("static background conservation: map and spinor branches") {
  // flat-target map run, T = 10
  {
    Model M = static_flat(128, 4);
    M.spinor_on = false;
    const Grid& g = M.grid;
    const std::size_t P = g.size();
    const int m = M.chart.m;
    FieldState fs = FieldState::zeros(P, m);
    real x[2];
    for (std::size_t p = 0; p < P; ++p) {
      g.coords(p, x);
      fs.phi[p * m] = 0.1 * std::sin(x[0]);
      fs.phi[p * m + 1] = 0.05 * std::cos(2.0 * x[0]);
      fs.pi[p * m] = 0.05 * std::cos(x[0]);
    }
    const real F0 = total_energy(M, fs).f_total;
    const real dt = 0.02;
    for (int j = 0; j < 500; ++j) fs = rk4_step(M, fs, dt);
    const real FT = total_energy(M, fs).f_total;
    CHECK(std::abs(FT / F0 - 1.0) < 1e-6);
  }

  // spinor branch: a const makes the extra k-energy term drop; free evolution
  // conserves e_spin[0] up to integrator drift
  {
    Model M = static_flat(32, 4);
    const Grid& g = M.grid;
    const std::size_t P = g.size();
    const int m = M.chart.m;
    Rng rng(29);
    FieldState fs = FieldState::zeros(P, m);
    real x[2];
    for (std::size_t p = 0; p < P; ++p) {
      g.coords(p, x);
      for (int I = 0; I < m; ++I)
        for (int c = 0; c < 2; ++c) {
          fs.psi[(p * m + I) * 2 + c] =
              cplx(0.3 * std::sin(x[0] + 0.3 * I), 0.2 * std::cos(x[0] + c));
          fs.chi[(p * m + I) * 2 + c] =
              cplx(0.1 * std::cos(2.0 * x[0] + I), -0.15 * std::sin(x[0]));
        }
    }
    const real E0 = total_energy(M, fs).e_spin[0];
    for (int j = 0; j < 200; ++j) fs = rk4_step(M, fs, 0.01);
    const real ET = total_energy(M, fs).e_spin[0];
    CHECK(std::abs(ET / E0 - 1.0) < 1e-8);
  }
}
