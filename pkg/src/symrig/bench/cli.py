"""Command line front end: bench run / list / describe.

Exit codes: 0 verdict produced, 2 gate failure, 3 numeric budget
exceeded.  BENCH_THREADS caps per-n parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import GateFailure, NumericBudgetExceeded, UnknownStep
from .config import load_config
from .pipeline import STEP_DESCRIPTIONS, describe, list_scenarios, run_scenario
from .report import emit_report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench",
                                     description="symplectic rigidity testbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("--config", required=True, help="key = value config file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--format", choices=["json", "csv"], default="json")

    sub.add_parser("list", help="list the built-in scenario families")

    p_desc = sub.add_parser("describe", help="explain a pipeline step")
    p_desc.add_argument("step", help=f"one of {sorted(STEP_DESCRIPTIONS)}")

    args = parser.parse_args(argv)

    if args.command == "list":
        for name in list_scenarios():
            print(name)
        return 0

    if args.command == "describe":
        try:
            print(describe(args.step))
        except UnknownStep as exc:
            print(str(exc), file=sys.stderr)
            return 2
        return 0

    cfg = load_config(args.config)
    try:
        report = run_scenario(cfg)
    except GateFailure as exc:
        payload = {"config": cfg.summary(), "failure": exc.step, "message": str(exc)}
        Path(args.out).mkdir(parents=True, exist_ok=True)
        with open(Path(args.out) / "failure.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
        print(f"gate failure: {exc}", file=sys.stderr)
        return 2
    except NumericBudgetExceeded as exc:
        print(f"numeric budget exceeded: {exc}", file=sys.stderr)
        return 3
    paths = emit_report(report, args.format, args.out)
    for p in paths:
        print(p)
    print(f"verdict: {report.verdict}  (N_r = {report.N_r}, hash {report.determinism_hash()[:16]})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
