from ._dwmaps import (
    CheckResult,
    EnergyReport,
    FieldState,
    InitParams,
    Model,
    ScenarioConfig,
    ScenarioOutcome,
    __version__,
    make_initial_data,
    parse_config,
    parse_config_file,
    run_battery,
    run_scenario,
    run_sweep,
    total_energy,
)

__all__ = [
    "CheckResult",
    "EnergyReport",
    "FieldState",
    "InitParams",
    "Model",
    "ScenarioConfig",
    "ScenarioOutcome",
    "__version__",
    "make_initial_data",
    "parse_config",
    "parse_config_file",
    "run_battery",
    "run_scenario",
    "run_sweep",
    "total_energy",
]
