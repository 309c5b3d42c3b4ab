"""Structured report of a rigidity run, with deterministic serialization."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import IoFailure

SCHEMA_VERSION = 1

# constants frozen into the pipeline, recorded verbatim for auditability
PIPELINE_CONSTANTS = {
    "error_schedule_default": "1/n",
    "c1": "(3*A*r)^-1",
    "c2": "(2*A*r)^-1",
    "ladder_fractions": ["]-r1/8, -r1/16[", "]-r1/4, 0[", "]-r1/2, r1/2[", "]-r1, r1["],
    "ladder_rho_bound": "rho < min(t_i')/c1",
    "degree_target": 1,
}


@dataclass(frozen=True)
class PerNRecord:
    n: int
    approx_error: float
    residual: float
    degree: int | None
    window_pass: bool
    hull_distance: float


@dataclass
class RigidityReport:
    config: dict
    per_n: list
    N_r: int
    A: float
    r0: float
    r: float
    ladder: dict
    constants: dict
    hull_monotone: bool
    tangent_plane: dict
    verdict: str | None
    timings: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "perN": [asdict(p) for p in self.per_n],
            "N_r": self.N_r,
            "A": self.A,
            "r0": self.r0,
            "r": self.r,
            "ladder": self.ladder,
            "constants": self.constants,
            "hull_monotone": self.hull_monotone,
            "tangent_plane": self.tangent_plane,
            "verdict": self.verdict,
        }
        if include_timings:
            out["timings"] = self.timings
        return out

    def determinism_hash(self) -> str:
        """Hash of the canonical JSON with the timings excluded."""
        payload = json.dumps(self.to_dict(include_timings=False),
                             sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def emit_report(report: RigidityReport, fmt: str, out_dir) -> list:
    """Write report.json and/or report.csv under out_dir; returns the paths."""
    if fmt not in ("json", "csv"):
        raise ValueError("format must be 'json' or 'csv'")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "json":
            doc = report.to_dict()
            doc["determinism_hash"] = report.determinism_hash()
            p = out_dir / "report.json"
            with open(p, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True, indent=2)
                fh.write("\n")
            paths.append(p)
        else:
            p = out_dir / "report.csv"
            with open(p, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["n", "approx_error", "residual", "degree",
                            "window_pass", "hull_distance"])
                for rec in report.per_n:
                    w.writerow([rec.n, rec.approx_error, rec.residual,
                                "" if rec.degree is None else rec.degree,
                                int(rec.window_pass), rec.hull_distance])
            paths.append(p)
        return paths
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
