#include "dwm/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace dwm {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

real parse_real(int line, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const real x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(line, key + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(int line, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(line, key + ": expected an integer, got '" + v + "'");
  }
}

bool parse_bool(int line, const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  fail(line, key + ": expected on/off, got '" + v + "'");
}

// raw profile settings gathered first, assembled after all lines are read
struct ProfileSpec {
  std::string family;
  real scale = 1.0;
  real lambda = 1.0;  // exponential rate
  real p = 1.0;       // power exponent
  real mu = 0.0;      // oscillation amplitude
  real omega = 1.0;   // oscillation frequency
};

Profile assemble_s(const ProfileSpec& ps) {
  if (ps.family.empty() || ps.family == "exponential" || ps.family == "exp")
    return Profile::exponential(ps.lambda, ps.scale);
  if (ps.family == "constant" || ps.family == "const") return Profile::constant(ps.scale);
  if (ps.family == "power") return Profile::power(ps.p, ps.scale);
  throw ConfigError("s.family must be constant, exponential, or power (got '" + ps.family +
                    "')");
}

Profile assemble_a(const ProfileSpec& ps) {
  if (ps.family.empty() || ps.family == "constant" || ps.family == "const")
    return Profile::constant(ps.scale);
  if (ps.family == "oscillating" || ps.family == "osc")
    return Profile::oscillating(ps.mu, ps.omega, ps.scale);
  throw ConfigError("a.family must be constant or oscillating (got '" + ps.family + "')");
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  ProfileSpec sspec, aspec;
  std::string lapse_family = "one";
  real lapse_beta = 0.0;
  std::string target_kind = "sphere";
  std::string warp_family = "sinh";

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (val.empty()) fail(line, key + ": empty value");

    if (key == "scenario.name") {
      cfg.name = val;
    } else if (key == "model.n") {
      cfg.model.st.n = static_cast<int>(parse_int(line, key, val));
    } else if (key == "s.family") {
      sspec.family = val;
    } else if (key == "s.scale") {
      sspec.scale = parse_real(line, key, val);
    } else if (key == "s.lambda") {
      sspec.lambda = parse_real(line, key, val);
    } else if (key == "s.p") {
      sspec.p = parse_real(line, key, val);
    } else if (key == "a.family") {
      aspec.family = val;
    } else if (key == "a.scale") {
      aspec.scale = parse_real(line, key, val);
    } else if (key == "a.mu") {
      aspec.mu = parse_real(line, key, val);
    } else if (key == "a.omega") {
      aspec.omega = parse_real(line, key, val);
    } else if (key == "lapse.family") {
      lapse_family = val;
    } else if (key == "lapse.beta") {
      lapse_beta = parse_real(line, key, val);
    } else if (key == "target.kind") {
      target_kind = val;
    } else if (key == "target.m") {
      cfg.model.chart.m = static_cast<int>(parse_int(line, key, val));
    } else if (key == "target.chart_radius") {
      cfg.model.chart.chart_radius = parse_real(line, key, val);
    } else if (key == "target.warp") {
      warp_family = val;
    } else if (key == "target.warp_c3") {
      cfg.model.chart.warp_c3 = parse_real(line, key, val);
    } else if (key == "target.warp_r_min") {
      cfg.model.chart.warp_r_min = parse_real(line, key, val);
    } else if (key == "grid.npts") {
      cfg.model.grid.npts = static_cast<int>(parse_int(line, key, val));
    } else if (key == "grid.fd_order") {
      cfg.model.grid.fd_order = static_cast<int>(parse_int(line, key, val));
    } else if (key == "init.epsilon") {
      cfg.init.epsilon = parse_real(line, key, val);
    } else if (key == "init.seed") {
      cfg.init.seed = static_cast<unsigned long long>(parse_int(line, key, val));
    } else if (key == "init.mode_cutoff") {
      cfg.init.mode_cutoff = static_cast<int>(parse_int(line, key, val));
    } else if (key == "init.spinor") {
      cfg.init.spinor = parse_bool(line, key, val);
    } else if (key == "run.t_end") {
      cfg.t_end = parse_real(line, key, val);
    } else if (key == "run.cfl") {
      cfg.cfl = parse_real(line, key, val);
    } else if (key == "run.dt_max") {
      cfg.dt_max = parse_real(line, key, val);
    } else if (key == "output.path") {
      cfg.output_path = val;
    } else if (key == "output.stride") {
      cfg.stride = static_cast<int>(parse_int(line, key, val));
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }

  // assemble composite pieces
  cfg.model.st.s = assemble_s(sspec);
  cfg.model.st.a = assemble_a(aspec);
  if (lapse_family == "one") {
    cfg.model.st.N = Lapse::one();
  } else if (lapse_family == "cosine") {
    cfg.model.st.N = Lapse::cosine(lapse_beta);
  } else {
    throw ConfigError("lapse.family must be one or cosine (got '" + lapse_family + "')");
  }
  if (target_kind == "sphere") {
    cfg.model.chart.kind = TargetKind::sphere_stereographic;
  } else if (target_kind == "flat") {
    cfg.model.chart.kind = TargetKind::flat;
  } else if (target_kind == "warped") {
    cfg.model.chart.kind = TargetKind::warped_surface;
  } else {
    throw ConfigError("target.kind must be flat, sphere, or warped (got '" + target_kind +
                      "')");
  }
  if (warp_family == "sinh") {
    cfg.model.chart.warp = WarpFamily::sinh_r;
  } else if (warp_family == "cubic") {
    cfg.model.chart.warp = WarpFamily::cubic;
  } else {
    throw ConfigError("target.warp must be sinh or cubic (got '" + warp_family + "')");
  }

  // key-level range validation with messages naming the key
  if (cfg.model.st.n != 2 && cfg.model.st.n != 3) throw ConfigError("model.n must be 2 or 3");
  if (cfg.model.grid.npts % 2 != 0) throw ConfigError("grid.npts must be even");
  if (cfg.model.grid.npts < 8) throw ConfigError("grid.npts must be >= 8");
  if (cfg.model.grid.fd_order != 2 && cfg.model.grid.fd_order != 4)
    throw ConfigError("grid.fd_order must be 2 or 4");
  if (!(cfg.init.epsilon > 0.0)) throw ConfigError("init.epsilon must be > 0");
  if (cfg.init.mode_cutoff < 1) throw ConfigError("init.mode_cutoff must be >= 1");
  if (std::abs(aspec.mu) >= 1.0) throw ConfigError("a.mu must satisfy |mu| < 1");
  if (std::abs(lapse_beta) >= 1.0) throw ConfigError("lapse.beta must satisfy |beta| < 1");
  if (!(cfg.t_end > 0.0)) throw ConfigError("run.t_end must be > 0");
  if (!(cfg.cfl > 0.0)) throw ConfigError("run.cfl must be > 0");
  if (!(cfg.dt_max > 0.0)) throw ConfigError("run.dt_max must be > 0");
  if (cfg.stride < 1) throw ConfigError("output.stride must be >= 1");
  if (cfg.model.chart.m != 2 &&
      !(cfg.model.chart.kind == TargetKind::flat && cfg.model.chart.m == 3))
    throw ConfigError("target.m must be 2 (3 allowed for the flat chart only)");

  // derived consistency
  cfg.model.grid.nsp = cfg.model.st.n - 1;
  cfg.model.st.horizon = cfg.t_end;
  cfg.model.frame = SpinFrame::standard(cfg.model.st.n);
  cfg.model.spinor_on = cfg.init.spinor;
  cfg.model.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dwm
