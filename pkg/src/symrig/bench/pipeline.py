"""The end-to-end rigidity pipeline on a configured map family.

Stages: symplectic input gate, approximation schedule, normalization
into a bounded graph chart, window bound with its threshold index,
degree gate, cut-off ladder construction, fiberwise hull convergence,
tangent-plane fit and the coisotropy verdict.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..cones import split_radius, window_ladder
from ..degree import _batch_eval, _batch_jac, graph_projection_degree
from ..errors import GateFailure, NumericBudgetExceeded, UnknownStep
from ..symplectic import (
    SymplecticSpace,
    TwistedGraph,
    coisotropic_check,
    gen_pos_normalize,
    normalized_map,
    symplectic_residual,
)
from .config import ScenarioConfig
from .families import build_family
from .report import PIPELINE_CONSTANTS, PerNRecord, RigidityReport

STEP_DESCRIPTIONS = {
    "symplectic-hypothesis": (
        "Input gate: every map in the sequence must pull the standard form "
        "back to itself; the max-entry residual of J^T Omega J - Omega is "
        "sampled and must stay below the configured gate."),
    "approximation": (
        "Each map is the time-one of a compactly supported isotopy whose "
        "uniform distance to the limit follows the error schedule "
        "(default 1/n, decreasing to zero); the threshold index N_r is the "
        "first n from which the graph window bound holds."),
    "window-bound": (
        "Twisted graph fibers over the r-ball must avoid the shell between "
        "2*A*r and 3*A*r once n >= N_r, so the graphs stay in a bounded "
        "chart of slope A."),
    "degree-gate": (
        "The base projection of each twisted graph over the r-ball must be "
        "proper of degree 1 for n >= N_r; the degree is a signed count of "
        "preimages of a regular value."),
    "ladder": (
        "From the slopes c1 = (3*A*r)^-1 and c2 = (2*A*r)^-1 the cut-off "
        "parameters, the splitting radius r1 and four nested product "
        "windows are built; the base intervals are the fixed fractions "
        "]-r1/8,-r1/16[, ]-r1/4,0[, ]-r1/2,r1/2[, ]-r1,r1[."),
    "hull-convergence": (
        "The fiberwise convex hulls of the windowed graphs must converge "
        "to the limit graph; the recorded Hausdorff-style distance has to "
        "decay monotonically beyond N_r."),
    "verdict": (
        "The tangent plane of the limit twisted graph at the origin is "
        "fitted by weighted least squares and checked to be coisotropic: "
        "its symplectic orthogonal must be contained in it."),
}


def list_scenarios() -> list:
    from .families import FAMILY_NAMES
    return list(FAMILY_NAMES)


def describe(step: str) -> str:
    if step not in STEP_DESCRIPTIONS:
        raise UnknownStep(f"unknown step {step!r}; known: {sorted(STEP_DESCRIPTIONS)}")
    return STEP_DESCRIPTIONS[step]


def _ball_samples(rng, radius, dim, count):
    pts = rng.standard_normal((count, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    radii = radius * rng.uniform(0, 1, size=(count, 1)) ** (1 / dim)
    return pts * radii


def _sup_distance(f, g, pts) -> float:
    return float(np.linalg.norm(_batch_eval(f.eval, pts) - _batch_eval(g.eval, pts), axis=1).max())


def _window_pass(psi_n, r, A, r0, rng, samples) -> bool:
    """Sampled containment of the windowed twisted graph in the inner slab."""
    d = psi_n.dim
    n = d // 2
    Z = np.concatenate([_ball_samples(rng, r, n, samples),
                        _ball_samples(rng, 3 * A * r, n, samples)], axis=1)
    out = _batch_eval(psi_n.eval, Z)
    base = np.concatenate([Z[:, :n], out[:, :n]], axis=1)
    fib = np.concatenate([Z[:, n:], -out[:, n:]], axis=1)
    bn, fn = np.linalg.norm(base, axis=1), np.linalg.norm(fib, axis=1)
    sel = (bn < r) & (fn < 3 * A * r)
    return not bool(np.any(fn[sel] > 2 * A * r + 1e-12))


def _fiber_covector(psi, base_pts, n, guesses, tol=1e-11, max_iter=60):
    """Solve psi(x; xi) = (x', .) for xi over rows (x, x'); twisted fibers."""
    X, Xp = base_pts[:, :n], base_pts[:, n:]
    xi = guesses.copy()
    d = 2 * n
    for _ in range(max_iter):
        Z = np.concatenate([X, xi], axis=1)
        out = _batch_eval(psi.eval, Z)
        res = out[:, :n] - Xp
        if float(np.abs(res).max()) <= tol:
            break
        J = _batch_jac(psi.jacobian, Z, d)[:, :n, n:]
        xi = xi - np.linalg.solve(J, res[..., None])[..., 0]
    Z = np.concatenate([X, xi], axis=1)
    out = _batch_eval(psi.eval, Z)
    return np.concatenate([xi, -out[:, n:]], axis=1)


def run_scenario(cfg: ScenarioConfig) -> RigidityReport:
    tols = cfg.tolerances
    t_start = time.time()
    timings = {}

    def budget_check():
        if time.time() - t_start > tols.max_seconds:
            raise NumericBudgetExceeded(
                f"exceeded {tols.max_seconds}s at {time.time() - t_start:.1f}s")

    schedule = cfg.schedule()
    errs = [schedule(k) for k in range(1, cfg.N + 1)]
    if any(b > a for a, b in zip(errs, errs[1:])) or not errs[-1] < 0.9 * errs[0]:
        raise GateFailure("approximation", "error schedule does not decrease to zero")

    phi_inf, phi_of_n = build_family(cfg.family, cfg.n, cfg.N, schedule,
                                     cfg.domain_radius, cfg.custom_h, cfg.flow_steps)
    d = 2 * cfg.n
    rng = np.random.default_rng(cfg.seed)
    gate_pts = _ball_samples(rng, 0.5 * cfg.domain_radius, d, 40)

    # stage: symplectic input gate
    t0 = time.time()
    for k in sorted({1, cfg.N // 2, cfg.N}):
        res = symplectic_residual(phi_of_n(k), gate_pts)
        if res > tols.residual_gate:
            raise GateFailure("symplectic-hypothesis",
                              f"residual {res:.3g} at n = {k} exceeds the gate")
    res_inf = symplectic_residual(phi_inf, gate_pts)
    timings["symplectic-hypothesis"] = time.time() - t0
    budget_check()

    # stage: normalization
    t0 = time.time()
    norm = gen_pos_normalize(phi_inf)
    A, r0 = norm.A, norm.r0
    psi_inf = normalized_map(phi_inf, norm)
    r = cfg.r if cfg.r is not None else r0 / 8
    timings["normalization"] = time.time() - t0
    budget_check()

    # per-n records
    t0 = time.time()
    approx_pts = _ball_samples(np.random.default_rng(cfg.seed + 1), r0, d, 200)
    base_src = _ball_samples(np.random.default_rng(cfg.seed + 2), r / 2, d, tols.hull_base_samples)
    inf_out = _batch_eval(psi_inf.eval, base_src)
    n_half = cfg.n
    base_pts = np.concatenate([base_src[:, :n_half], inf_out[:, :n_half]], axis=1)
    fib_inf = np.concatenate([base_src[:, n_half:], -inf_out[:, n_half:]], axis=1)

    def per_n_record(k: int) -> PerNRecord:
        psi_k = normalized_map(phi_of_n(k), norm)
        approx = _sup_distance(psi_k, psi_inf, approx_pts)
        resid = symplectic_residual(phi_of_n(k), gate_pts[:10])
        wpass = _window_pass(psi_k, r, A, r0,
                             np.random.default_rng(cfg.seed + 100 + k),
                             tols.window_samples)
        fib_k = _fiber_covector(psi_k, base_pts, n_half, base_src[:, n_half:])
        hull = float(np.linalg.norm(fib_k - fib_inf, axis=1).max())
        return PerNRecord(n=k, approx_error=approx, residual=resid,
                          degree=None, window_pass=wpass, hull_distance=hull)

    workers = os.environ.get("BENCH_THREADS")
    workers = int(workers) if workers else min(4, os.cpu_count() or 1)
    ns = list(range(1, cfg.N + 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(per_n_record, ns))
    else:
        records = [per_n_record(k) for k in ns]
    records.sort(key=lambda rec: rec.n)
    timings["per-n"] = time.time() - t0
    budget_check()

    # threshold index: first n from which the window bound always holds
    passes = [rec.window_pass for rec in records]
    N_r = None
    for i in range(len(passes)):
        if all(passes[i:]):
            N_r = i + 1
            break
    if N_r is None:
        raise GateFailure("approximation", "no threshold index: window bound never stabilizes")

    # stage: degree gate
    t0 = time.time()

    def degree_at(k: int) -> int:
        psi_k = normalized_map(phi_of_n(k), norm)
        graph = TwistedGraph(psi_k)
        return graph_projection_degree(graph, r, A,
                                       seeds_per_axis=tols.degree_seeds_per_axis)

    degree_ns = [k for k in ns if k >= N_r]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            degs = list(pool.map(degree_at, degree_ns))
    else:
        degs = [degree_at(k) for k in degree_ns]
    for k, dg in zip(degree_ns, degs):
        records[k - 1] = PerNRecord(n=k, approx_error=records[k - 1].approx_error,
                                    residual=records[k - 1].residual, degree=dg,
                                    window_pass=records[k - 1].window_pass,
                                    hull_distance=records[k - 1].hull_distance)
        if dg != 1:
            raise GateFailure("degree-gate", f"degree {dg} != 1 at n = {k}")
    timings["degree-gate"] = time.time() - t0
    budget_check()

    # stage: cut-off ladder
    t0 = time.time()
    c1 = 1.0 / (3 * A * r)
    c2 = 1.0 / (2 * A * r)
    r1 = split_radius(c1, c2, r)
    ladder = window_ladder(r1, c1)
    ladder_dict = {
        "c1": c1, "c2": c2, "r1": r1, "rho": ladder.rho,
        "centers": list(ladder.centers), "radii": list(ladder.radii),
        "ball_radii": list(ladder.ball_radii), "shrink": list(ladder.shrink),
        "nesting_margins": ladder.nesting_margins(),
    }
    timings["ladder"] = time.time() - t0
    budget_check()

    # stage: hull convergence beyond the threshold
    tail = [rec.hull_distance for rec in records if rec.n >= N_r]
    hull_monotone = all(b <= a + tols.hull_monotone_tol for a, b in zip(tail, tail[1:]))

    # stage: tangent plane and verdict
    t0 = time.time()
    fit_rng = np.random.default_rng(cfg.seed + 3)
    fit_src = _ball_samples(fit_rng, 1e-2 * r0, d, 200)
    rows = TwistedGraph(psi_inf, samples=None).twisted_rows(fit_src)
    base, fib = rows[:, :d], rows[:, d:]
    wts = np.exp(-0.5 * (np.linalg.norm(base, axis=1) / (1e-2 * r0)) ** 2)
    Wm = np.sqrt(wts)[:, None]
    w_fit, *_ = np.linalg.lstsq(base * Wm, fib * Wm, rcond=None)
    fit_resid = float(np.abs(base @ w_fit - fib).max())
    plane = np.concatenate([np.eye(d), w_fit.T], axis=0)
    cois = coisotropic_check(plane, SymplecticSpace(d))
    timings["verdict"] = time.time() - t0

    verdict = None
    if cois and fit_resid <= tols.plane_fit_tol and hull_monotone:
        verdict = "coisotropic"
    else:
        detail = (f"coisotropic_check={cois}, plane residual {fit_resid:.2e}, "
                  f"hull monotone {hull_monotone}")
        raise GateFailure("verdict", detail)

    timings["total"] = time.time() - t_start
    return RigidityReport(
        config=cfg.summary(),
        per_n=records,
        N_r=N_r,
        A=A,
        r0=r0,
        r=r,
        ladder=ladder_dict,
        constants=dict(PIPELINE_CONSTANTS),
        hull_monotone=hull_monotone,
        tangent_plane={"w": w_fit.tolist(), "residual": fit_resid,
                       "coisotropic": bool(cois)},
        verdict=verdict,
        timings=timings,
    )
