// python surface: config parsing, scenario runs, the identity battery, and
// enough of the state/energy plumbing to script small experiments

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dwm/config.hpp"
#include "dwm/dynamics.hpp"
#include "dwm/energy.hpp"
#include "dwm/scenario.hpp"
#include "dwm/verify.hpp"

namespace py = pybind11;
using namespace dwm;

PYBIND11_MODULE(_dwmaps, m) {
  m.doc() = "wave maps and Dirac-wave maps on expanding warped-product backgrounds";
  m.attr("__version__") = "0.1.0";

  py::class_<Model>(m, "Model")
      .def_readwrite("spinor_on", &Model::spinor_on)
      .def_property_readonly("n", [](const Model& M) { return M.st.n; })
      .def_property_readonly("npts", [](const Model& M) { return M.grid.npts; })
      .def_property_readonly("fd_order", [](const Model& M) { return M.grid.fd_order; });

  py::class_<InitParams>(m, "InitParams")
      .def(py::init<>())
      .def_readwrite("epsilon", &InitParams::epsilon)
      .def_readwrite("seed", &InitParams::seed)
      .def_readwrite("mode_cutoff", &InitParams::mode_cutoff)
      .def_readwrite("spinor", &InitParams::spinor);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("model", &ScenarioConfig::model)
      .def_readwrite("init", &ScenarioConfig::init)
      .def_readwrite("t_end", &ScenarioConfig::t_end)
      .def_readwrite("cfl", &ScenarioConfig::cfl)
      .def_readwrite("dt_max", &ScenarioConfig::dt_max)
      .def_readwrite("output_path", &ScenarioConfig::output_path)
      .def_readwrite("stride", &ScenarioConfig::stride)
      .def_readwrite("name", &ScenarioConfig::name);

  py::class_<ScenarioOutcome>(m, "ScenarioOutcome")
      .def_readonly("exit_code", &ScenarioOutcome::exit_code)
      .def_readonly("verdict", &ScenarioOutcome::verdict)
      .def_readonly("abort_reason", &ScenarioOutcome::abort_reason)
      .def_readonly("t_last", &ScenarioOutcome::t_last)
      .def_readonly("c_hat", &ScenarioOutcome::c_hat)
      .def_readonly("phi_total", &ScenarioOutcome::phi_total)
      .def_readonly("max_ratio", &ScenarioOutcome::max_ratio)
      .def_readonly("max_chart_radius", &ScenarioOutcome::max_chart_radius)
      .def_readonly("f_initial", &ScenarioOutcome::f_initial)
      .def_readonly("f_final", &ScenarioOutcome::f_final)
      .def_readonly("wall_seconds", &ScenarioOutcome::wall_seconds)
      .def_readonly("steps", &ScenarioOutcome::steps);

  py::class_<FieldState>(m, "FieldState")
      .def_readonly("t", &FieldState::t)
      .def_readonly("m", &FieldState::m)
      .def_readonly("phi", &FieldState::phi)
      .def_readonly("pi", &FieldState::pi)
      .def_readonly("psi", &FieldState::psi)
      .def_readonly("chi", &FieldState::chi);

  py::class_<EnergyReport>(m, "EnergyReport")
      .def_readonly("e_map", &EnergyReport::e_map)
      .def_readonly("e_spin", &EnergyReport::e_spin)
      .def_readonly("psi_l2", &EnergyReport::psi_l2)
      .def_readonly("f_map", &EnergyReport::f_map)
      .def_readonly("f_spin", &EnergyReport::f_spin)
      .def_readonly("f_total", &EnergyReport::f_total);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("value", &CheckResult::value)
      .def_readonly("slope", &CheckResult::slope)
      .def_readonly("tol", &CheckResult::tol)
      .def_readonly("passed", &CheckResult::pass)
      .def_readonly("detail", &CheckResult::detail);

  m.def("parse_config", &parse_config, py::arg("text"),
        "parse scenario configuration text (key = value lines)");
  m.def("parse_config_file", &parse_config_file, py::arg("path"));
  m.def("run_scenario", &run_scenario, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "evolve one scenario; writes series.csv and summary.json");
  m.def("run_sweep", &run_sweep, py::arg("config_paths"),
        py::call_guard<py::gil_scoped_release>(),
        "run many configs (worker count capped by WAVEMAP_THREADS)");
  m.def("run_battery", &run_battery, py::arg("seed") = 1ull,
        py::call_guard<py::gil_scoped_release>(),
        "randomized structural identity checks; deterministic per seed");
  m.def("make_initial_data", &make_initial_data, py::arg("model"), py::arg("init"));
  m.def("total_energy", &total_energy, py::arg("model"), py::arg("state"));
}
