from .config import ScenarioConfig, ToleranceConfig, load_config
from .pipeline import run_scenario
from .report import RigidityReport, emit_report

__all__ = [
    "ScenarioConfig",
    "ToleranceConfig",
    "load_config",
    "run_scenario",
    "RigidityReport",
    "emit_report",
]
