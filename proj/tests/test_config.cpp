#include "dwm/config.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "doctest.h"
#include "helpers.hpp"

using namespace dwm;
using dwmtest::rel;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty text yields the documented defaults") {
  const ScenarioConfig cfg = parse_config("");
  CHECK(cfg.name == "scenario");
  CHECK(cfg.model.st.n == 3);
  CHECK(rel(cfg.model.st.s.value(0.0), 1.0) < 1e-15);
  CHECK(rel(cfg.model.st.s.value(1.0), std::exp(1.0)) < 1e-14);
  CHECK(cfg.model.st.a.value(0.7) == 1.0);
  CHECK(cfg.model.st.a.d1(0.7) == 0.0);
  CHECK(cfg.model.st.N.trivial());
  CHECK(cfg.model.chart.kind == TargetKind::sphere_stereographic);
  CHECK(cfg.model.chart.m == 2);
  CHECK(cfg.model.grid.nsp == 2);
  CHECK(cfg.model.grid.npts == 64);
  CHECK(cfg.model.grid.fd_order == 4);
  CHECK(cfg.init.epsilon == 1e-2);
  CHECK(cfg.init.seed == 1);
  CHECK(cfg.init.mode_cutoff == 4);
  CHECK(cfg.init.spinor);
  CHECK(cfg.t_end == 10.0);
  CHECK(cfg.cfl == 0.4);
  CHECK(cfg.dt_max == 0.05);
  CHECK(cfg.stride == 5);
  CHECK(cfg.output_path == "out");
  CHECK(cfg.model.st.horizon == cfg.t_end);
  CHECK(cfg.model.spinor_on);
  CHECK(cfg.model.frame.n == 3);
}

TEST_CASE("validation errors name the offending key") {
  CHECK(contains(error_of("grid.npts = 63\n"), "grid.npts must be even"));
  CHECK(contains(error_of("grid.npts = 6\n"), "grid.npts must be >= 8"));
  CHECK(contains(error_of("model.n = 4\n"), "model.n must be 2 or 3"));
  CHECK(contains(error_of("grid.fd_order = 3\n"), "grid.fd_order must be 2 or 4"));
  CHECK(contains(error_of("init.epsilon = -1\n"), "init.epsilon must be > 0"));
  CHECK(contains(error_of("init.mode_cutoff = 0\n"), "init.mode_cutoff must be >= 1"));
  CHECK(contains(error_of("a.family = oscillating\na.mu = 1.0\n"),
                 "a.mu must satisfy |mu| < 1"));
  CHECK(contains(error_of("lapse.family = cosine\nlapse.beta = 1.2\n"),
                 "lapse.beta must satisfy |beta| < 1"));
  CHECK(contains(error_of("run.t_end = 0\n"), "run.t_end must be > 0"));
  CHECK(contains(error_of("output.stride = 0\n"), "output.stride must be >= 1"));
  CHECK(contains(error_of("target.m = 3\n"), "target.m must be 2"));
  CHECK(error_of("target.kind = flat\ntarget.m = 3\n") == "");  // allowed for flat
}

TEST_CASE("parse errors carry the line number") {
  CHECK(contains(error_of("# comment\n\nfoo.bar = 1\n"), "line 3"));
  CHECK(contains(error_of("# comment\n\nfoo.bar = 1\n"), "unknown key 'foo.bar'"));
  CHECK(contains(error_of("grid.npts\n"), "line 1"));
  CHECK(contains(error_of("grid.npts\n"), "expected 'key = value'"));
  CHECK(contains(error_of("grid.npts = abc\n"), "grid.npts: expected an integer"));
  CHECK(contains(error_of("run.cfl = fast\n"), "run.cfl: expected a number"));
  CHECK(contains(error_of("init.spinor = maybe\n"), "init.spinor: expected on/off"));
  CHECK(contains(error_of("s.family = quadratic\n"), "s.family must be"));
  CHECK(contains(error_of("target.kind = torus\n"), "target.kind must be"));
}

TEST_CASE("comments, blank lines, and inline comments are ignored") {
  const ScenarioConfig cfg = parse_config(
      "# leading comment\n"
      "\n"
      "grid.npts = 32   # trailing comment\n"
      "   scenario.name = padded   \n");
  CHECK(cfg.model.grid.npts == 32);
  CHECK(cfg.name == "padded");
}

TEST_CASE("boolean spellings") {
  for (const char* v : {"on", "true", "1", "yes"})
    CHECK(parse_config(std::string("init.spinor = ") + v + "\n").init.spinor);
  for (const char* v : {"off", "false", "0", "no"})
    CHECK(!parse_config(std::string("init.spinor = ") + v + "\n").init.spinor);
}

TEST_CASE("power-law expansion profile: finite conformal horizon") {
  const ScenarioConfig cfg = parse_config(
      "s.family = power\n"
      "s.p = 2\n"
      "run.t_end = 50\n");
  CHECK(rel(cfg.model.st.s.value(1.0), 4.0) < 1e-15);
  CHECK(rel(cfg.model.st.s.value(3.0), 16.0) < 1e-15);
  // int (1+t)^{-2} = 1 - 1/(1+T) and int f = int 2(1+t)^{-3} = 1 - 1/(1+T)^2,
  // both finite as T grows
  const ConformalIntegrals ci = conformal_factor_integrals(cfg.model.st, 50.0);
  CHECK(rel(ci.sinv_integral, 1.0 - 1.0 / 51.0) < 1e-9);
  CHECK(rel(ci.f_integral, 1.0 - 1.0 / (51.0 * 51.0)) < 1e-9);
  const real phi = conformal_phi_between(cfg.model.st, 0.0, 50.0);
  CHECK(rel(phi, ci.phi) < 1e-12);
  CHECK(!ci.sinv_divergent);
}

TEST_CASE("every key round-trips into the config") {
  const ScenarioConfig cfg = parse_config(
      "scenario.name = full\n"
      "model.n = 3\n"
      "s.family = constant\n"
      "s.scale = 1.5\n"
      "a.family = oscillating\n"
      "a.mu = 0.3\n"
      "a.omega = 2.0\n"
      "a.scale = 1.1\n"
      "lapse.family = cosine\n"
      "lapse.beta = 0.2\n"
      "target.kind = warped\n"
      "target.warp = cubic\n"
      "target.warp_c3 = 0.7\n"
      "target.warp_r_min = 0.2\n"
      "target.chart_radius = 5.0\n"
      "grid.npts = 16\n"
      "grid.fd_order = 2\n"
      "init.epsilon = 0.02\n"
      "init.seed = 99\n"
      "init.mode_cutoff = 3\n"
      "init.spinor = off\n"
      "run.t_end = 4.0\n"
      "run.cfl = 0.25\n"
      "run.dt_max = 0.01\n"
      "output.path = runs/full\n"
      "output.stride = 2\n");
  CHECK(cfg.name == "full");
  CHECK(cfg.model.st.n == 3);
  CHECK(cfg.model.st.s.value(7.0) == 1.5);
  CHECK(rel(cfg.model.st.a.value(0.0), 1.1) < 1e-15);
  CHECK(rel(cfg.model.st.a.value(Grid::pi() / 4.0), 1.1 * (1.0 + 0.3)) < 1e-12);
  CHECK(!cfg.model.st.N.trivial());
  CHECK(cfg.model.chart.kind == TargetKind::warped_surface);
  CHECK(cfg.model.chart.warp == WarpFamily::cubic);
  CHECK(cfg.model.chart.warp_c3 == 0.7);
  CHECK(cfg.model.chart.warp_r_min == 0.2);
  CHECK(cfg.model.chart.chart_radius == 5.0);
  CHECK(cfg.model.grid.npts == 16);
  CHECK(cfg.model.grid.fd_order == 2);
  CHECK(cfg.init.epsilon == 0.02);
  CHECK(cfg.init.seed == 99);
  CHECK(cfg.init.mode_cutoff == 3);
  CHECK(!cfg.init.spinor);
  CHECK(!cfg.model.spinor_on);
  CHECK(cfg.t_end == 4.0);
  CHECK(cfg.cfl == 0.25);
  CHECK(cfg.dt_max == 0.01);
  CHECK(cfg.output_path == "runs/full");
  CHECK(cfg.stride == 2);
  CHECK(cfg.model.grid.nsp == 2);
  CHECK(cfg.model.frame.n == 3);
}

TEST_CASE("n = 2 wires a one-dimensional grid and matching frame") {
  const ScenarioConfig cfg = parse_config("model.n = 2\ngrid.npts = 24\n");
  CHECK(cfg.model.grid.nsp == 1);
  CHECK(cfg.model.frame.n == 2);
}

TEST_CASE("missing config file") {
  try {
    parse_config_file("/nonexistent/path.cfg");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), "cannot open config file '/nonexistent/path.cfg'"));
  }
}
