#include "dwm/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

namespace dwm {
namespace {

std::string fmt17(real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SeriesRow {
  real t = 0.0;
  std::vector<real> e_map;
  std::vector<real> e_spin;
  real psi_l2 = 0.0;
  real f_total = 0.0;
  real dirac_res = 0.0;
  real phi = 0.0;  // Phi(t), accumulated
};

void write_series(const std::string& path, int r, const std::vector<SeriesRow>& rows,
                  real f0, real c_hat) {
  std::ofstream out(path);
  out << "t";
  for (int k = 0; k <= r; ++k) out << ",E_map_" << k;
  for (int k = 0; k < r; ++k) out << ",E_spin_" << k;
  out << ",psi_l2,F_total,dirac_res,bound_value,bound_ok\n";
  for (const SeriesRow& row : rows) {
    const real bound = f0 * std::exp(c_hat * row.phi);
    const bool ok = row.f_total <= 2.0 * bound;
    out << fmt17(row.t);
    for (int k = 0; k <= r; ++k) out << ',' << fmt17(row.e_map[k]);
    for (int k = 0; k < r; ++k) out << ',' << fmt17(row.e_spin[k]);
    out << ',' << fmt17(row.psi_l2) << ',' << fmt17(row.f_total) << ','
        << fmt17(row.dirac_res) << ',' << fmt17(bound) << ',' << (ok ? 1 : 0) << '\n';
  }
}

int env_thread_cap() {
  const char* v = std::getenv("WAVEMAP_THREADS");
  if (!v) return 0;
  const int k = std::atoi(v);
  return k > 0 ? k : 0;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
  const auto wall0 = std::chrono::steady_clock::now();
  const Model& M = cfg.model;
  const int r = M.st.sobolev_r();
  ScenarioOutcome oc;

  std::vector<SeriesRow> rows;
  real max_radius = 0.0;

  auto sample = [&](const FieldState& fs) {
    EnergyReport er = total_energy(M, fs);
    SeriesRow row;
    row.t = fs.t;
    row.e_map = er.e_map;
    row.e_spin = er.e_spin;
    row.psi_l2 = er.psi_l2;
    row.f_total = er.f_total;
    row.dirac_res = M.spinor_on ? dirac_residual(M, fs) : 0.0;
    row.phi = rows.empty() ? 0.0
                           : rows.back().phi +
                                 conformal_phi_between(M.st, rows.back().t, fs.t);
    rows.push_back(std::move(row));
  };

  try {
    FieldState fs = make_initial_data(M, cfg.init);
    sample(fs);
    long long step = 0;
    const real t_end = cfg.t_end;
    while (fs.t < t_end * (1.0 - 1e-14)) {
      real dt = cfl_dt(M, fs.t, cfg.cfl, cfg.dt_max);
      if (fs.t + dt > t_end) dt = t_end - fs.t;
      fs = rk4_step(M, fs, dt, &max_radius);
      ++step;
      oc.t_last = fs.t;
      if (step % cfg.stride == 0) sample(fs);
    }
    oc.steps = step;
    oc.exit_code = 0;
  } catch (const ChartExit& e) {
    oc.exit_code = 2;
    oc.verdict = "aborted";
    oc.abort_reason = std::string("chart exit: ") + e.what();
  } catch (const NumericalAbort& e) {
    oc.exit_code = 2;
    oc.verdict = "aborted";
    oc.abort_reason = std::string("numerical abort: ") + e.what();
  }

  oc.max_chart_radius = max_radius;
  const real f0 = rows.empty() ? 0.0 : rows.front().f_total;
  oc.f_initial = f0;
  oc.f_final = rows.empty() ? 0.0 : rows.back().f_total;

  // Gronwall verdict from the sampled series (also fitted for aborted runs so
  // the partial series still carries bound columns)
  GronwallResult gr;
  if (rows.size() >= 2) {
    std::vector<real> ts, phis, F;
    ts.reserve(rows.size());
    for (const SeriesRow& row : rows) {
      ts.push_back(row.t);
      phis.push_back(row.phi);
      F.push_back(row.f_total);
    }
    gr = gronwall_check(M.st, ts, phis, F, cfg.t_end);
  }
  oc.c_hat = gr.c_hat;
  oc.phi_total = gr.phi_total;
  oc.max_ratio = gr.max_ratio;
  if (oc.exit_code == 0)
    oc.verdict = gr.sinv_divergent ? "outside_hypotheses" : gr.verdict;

  const auto wall1 = std::chrono::steady_clock::now();
  oc.wall_seconds = std::chrono::duration<real>(wall1 - wall0).count();

  std::filesystem::create_directories(cfg.output_path);
  write_series(cfg.output_path + "/series.csv", r, rows, f0, oc.c_hat);

  nlohmann::json js;
  js["scenario"] = cfg.name;
  js["verdict"] = oc.verdict;
  js["abort_reason"] = oc.abort_reason;
  js["exit_code"] = oc.exit_code;
  js["t_last"] = oc.t_last;
  js["steps"] = oc.steps;
  js["c_hat"] = oc.c_hat;
  js["phi_total"] = oc.phi_total;
  js["max_ratio"] = oc.max_ratio;
  js["sinv_divergent"] = gr.sinv_divergent;
  js["max_chart_radius"] = oc.max_chart_radius;
  js["f_initial"] = oc.f_initial;
  js["f_final"] = oc.f_final;
  js["wall_seconds"] = oc.wall_seconds;
  std::ofstream(cfg.output_path + "/summary.json") << js.dump(2) << '\n';

  return oc;
}

int run_sweep(const std::vector<std::string>& config_paths) {
  if (config_paths.empty()) return 1;
  int cap = env_thread_cap();
  if (cap == 0) cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  const int nworkers = std::min<int>(cap, static_cast<int>(config_paths.size()));

  std::atomic<std::size_t> next{0};
  std::vector<int> codes(config_paths.size(), 0);
  std::mutex io;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config_paths.size()) return;
      int code = 0;
      std::string label = config_paths[i];
      std::string note;
      try {
        const ScenarioConfig cfg = parse_config_file(config_paths[i]);
        const ScenarioOutcome oc = run_scenario(cfg);
        code = oc.exit_code;
        label = cfg.name;
        note = oc.verdict;
      } catch (const ConfigError& e) {
        code = 1;
        note = e.what();
      }
      codes[i] = code;
      std::lock_guard<std::mutex> lk(io);
      std::printf("[sweep] %s: exit %d%s%s\n", label.c_str(), code,
                  note.empty() ? "" : " — ", note.c_str());
      std::fflush(stdout);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(nworkers);
  for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  int worst = 0;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

}  // namespace dwm
