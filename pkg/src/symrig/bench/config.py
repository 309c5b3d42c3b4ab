"""Scenario configuration and the line-based config file format."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from .families import FAMILY_NAMES


@dataclass(frozen=True)
class ToleranceConfig:
    residual_gate: float = 1e-2
    plane_fit_tol: float = 1e-6
    hull_monotone_tol: float = 1e-6
    window_samples: int = 4000
    degree_seeds_per_axis: int = 21
    hull_base_samples: int = 64
    max_seconds: float = float("inf")


@dataclass(frozen=True)
class ScenarioConfig:
    family: str = "linear_rotation"
    n: int = 1
    N: int = 50
    error_schedule: str = "1/n"
    r: float | None = None
    domain_radius: float = 3.0
    custom_h: str | None = None
    flow_steps: int = 200
    seed: int = 0
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.N < 3:
            raise ValueError("need N >= 3")
        if self.n not in (1, 2):
            raise ValueError("half-dimension must be 1 or 2")
        if self.r is not None and self.r <= 0:
            raise ValueError("window radius must be positive")

    def schedule(self):
        """The error schedule as a callable of n."""
        name = self.error_schedule.replace(" ", "")
        if name == "1/n":
            return lambda k: 1.0 / k
        if name == "1/n^2":
            return lambda k: 1.0 / k**2
        if name == "1/log":
            import math
            return lambda k: 1.0 / math.log(k + 1.0)
        if name.startswith("const:"):
            c = float(name.split(":", 1)[1])
            return lambda k: c
        raise ValueError(f"unknown error schedule {self.error_schedule!r}")

    def summary(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "N": self.N,
            "error_schedule": self.error_schedule,
            "r": self.r,
            "domain_radius": self.domain_radius,
            "custom_h": self.custom_h,
            "flow_steps": self.flow_steps,
            "seed": self.seed,
        }


_SCENARIO_KEYS = {f.name for f in fields(ScenarioConfig)} - {"tolerances"}
_TOL_KEYS = {f.name for f in fields(ToleranceConfig)}


def load_config(path) -> ScenarioConfig:
    """Parse a sectioned key = value file (UTF-8); unknown keys are errors."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (n vs N)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    unknown_sections = set(parser.sections()) - {"scenario", "tolerances"}
    if unknown_sections:
        raise ValueError(f"unknown config sections: {sorted(unknown_sections)}")
    kw = {}
    if parser.has_section("scenario"):
        for key, val in parser["scenario"].items():
            if key not in _SCENARIO_KEYS:
                raise ValueError(f"unknown key {key!r} in [scenario]")
            kw[key] = _coerce(ScenarioConfig, key, val)
    tol_kw = {}
    if parser.has_section("tolerances"):
        for key, val in parser["tolerances"].items():
            if key not in _TOL_KEYS:
                raise ValueError(f"unknown key {key!r} in [tolerances]")
            tol_kw[key] = _coerce(ToleranceConfig, key, val)
    return ScenarioConfig(tolerances=ToleranceConfig(**tol_kw), **kw)


def _coerce(cls, key, val: str):
    for f in fields(cls):
        if f.name != key:
            continue
        if f.type in ("int",):
            return int(val)
        if f.type in ("float", "float | None"):
            return None if val.lower() == "none" else float(val)
        return None if val.lower() == "none" else val
    raise KeyError(key)
