#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dwm/config.hpp"
#include "dwm/scenario.hpp"
#include "dwm/verify.hpp"

namespace fs = std::filesystem;

namespace {

// expand a shell-style glob (\*, ? over the filename part) against the filesystem
std::vector<std::string> expand_glob(const std::string& pattern) {
  const fs::path pat(pattern);
  const fs::path dir = pat.has_parent_path() ? pat.parent_path() : fs::path(".");
  const std::string leaf = pat.filename().string();

  auto match = [](const std::string& name, const std::string& glob) {
    // iterative wildcard match: '*' any run, '?' any single char
    std::size_t n = 0, g = 0, star = std::string::npos, back = 0;
    while (n < name.size()) {
      if (g < glob.size() && (glob[g] == '?' || glob[g] == name[n])) {
        ++n;
        ++g;
      } else if (g < glob.size() && glob[g] == '*') {
        star = g++;
        back = n;
      } else if (star != std::string::npos) {
        g = star + 1;
        n = ++back;
      } else {
        return false;
      }
    }
    while (g < glob.size() && glob[g] == '*') ++g;
    return g == glob.size();
  };

  std::vector<std::string> out;
  if (leaf.find('*') == std::string::npos && leaf.find('?') == std::string::npos) {
    if (fs::exists(pat)) out.push_back(pat.string());
    return out;
  }
  std::error_code ec;
  for (const auto& ent : fs::directory_iterator(dir, ec)) {
    if (!ent.is_regular_file()) continue;
    if (match(ent.path().filename().string(), leaf)) out.push_back(ent.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_simulate(const std::string& config_path) {
  dwm::ScenarioConfig cfg;
  try {
    cfg = dwm::parse_config_file(config_path);
  } catch (const dwm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }
  const dwm::ScenarioOutcome oc = dwm::run_scenario(cfg);
  std::printf("%s: verdict=%s t_last=%.6g steps=%lld F0=%.6g F_end=%.6g wall=%.2fs\n",
              cfg.name.c_str(), oc.verdict.c_str(), oc.t_last, oc.steps, oc.f_initial,
              oc.f_final, oc.wall_seconds);
  if (!oc.abort_reason.empty())
    std::printf("%s: %s\n", cfg.name.c_str(), oc.abort_reason.c_str());
  return oc.exit_code;
}

int cmd_verify(unsigned long long seed) {
  const auto results = dwm::run_battery(seed);
  std::printf("name,value,slope,tol,pass,detail\n");
  bool all = true;
  for (const auto& r : results) {
    std::printf("%s,%.6g,%.4g,%.3g,%s,\"%s\"\n", r.name.c_str(), r.value, r.slope, r.tol,
                r.pass ? "pass" : "FAIL", r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("# %zu checks, %s\n", results.size(), all ? "all passed" : "FAILURES present");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dirac-wave-map evolution on expanding warped products"};
  app.require_subcommand(1);

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "run one scenario from a config file");
  sim->add_option("config", config_path, "path to key=value config")->required();

  unsigned long long seed = 1;
  auto* ver = app.add_subcommand("verify", "run the structural identity battery");
  ver->add_option("--seed", seed, "battery seed (default 1)");

  std::vector<std::string> globs;
  auto* sw = app.add_subcommand("sweep", "run every config matching the glob(s)");
  sw->add_option("glob", globs, "config file glob(s)")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return cmd_simulate(config_path);
  if (ver->parsed()) return cmd_verify(seed);
  if (sw->parsed()) {
    std::vector<std::string> paths;
    for (const auto& g : globs) {
      auto m = expand_glob(g);
      paths.insert(paths.end(), m.begin(), m.end());
    }
    if (paths.empty()) {
      std::fprintf(stderr, "sweep: no config matches\n");
      return 1;
    }
    return dwm::run_sweep(paths);
  }
  return 0;
}
