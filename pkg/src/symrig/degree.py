"""Topological degree of proper maps between equal-dimensional spaces.

The degree is evaluated as the signed count of preimages of a regular
value, with preimages located by dense grid seeding plus Newton
polishing.  Properness is checked by sampling the search-window
boundary; the sampling densities are configuration and the residual
soundness gap is deliberate and documented in the returned reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    HypothesisUnverified,
    NearCriticalValue,
    PropernessViolation,
    WindowBoundViolated,
)


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.lo >= self.hi):
            raise ValueError("degenerate box")

    @property
    def dim(self) -> int:
        return self.lo.size

    @staticmethod
    def cube(radius: float, dim: int) -> "Box":
        r = float(radius)
        return Box(-r * np.ones(dim), r * np.ones(dim))

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x > self.lo + margin) and np.all(x < self.hi - margin))

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [np.linspace(self.lo[i], self.hi[i], per_axis) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def boundary_samples(self, total: int = 2000) -> np.ndarray:
        d = self.dim
        per_face = max(2, int(round((total / (2 * d)) ** (1 / max(d - 1, 1)))))
        pts = []
        for i in range(d):
            others = [np.linspace(self.lo[j], self.hi[j], per_face) for j in range(d) if j != i]
            if others:
                mesh = np.meshgrid(*others, indexing="ij")
                flat = np.stack([m.ravel() for m in mesh], axis=-1)
            else:
                flat = np.zeros((1, 0))
            for val in (self.lo[i], self.hi[i]):
                face = np.insert(flat, i, val, axis=1)
                pts.append(face)
        return np.concatenate(pts, axis=0)


def _batch_eval(fn, X):
    X = np.asarray(X, dtype=float)
    try:
        out = np.asarray(fn(X), dtype=float)
        if out.shape == X.shape:
            return out
    except Exception:
        pass
    return np.stack([np.asarray(fn(x), dtype=float) for x in X])


def _batch_jac(fn, X, d):
    X = np.asarray(X, dtype=float)
    try:
        out = np.asarray(fn(X), dtype=float)
        if out.shape == (X.shape[0], d, d):
            return out
    except Exception:
        pass
    return np.stack([np.asarray(fn(x), dtype=float) for x in X])


@dataclass
class MapWithJacobian:
    """A C^1 map with derivative access on a box domain."""

    eval: callable
    jacobian: callable
    domain: Box
    dim: int
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def jac(self, x):
        return np.asarray(self.jacobian(np.asarray(x, dtype=float)), dtype=float)

    def check_jacobian(self, seed: int = 0, n_points: int = 20,
                       rel_tol: float = 1e-5, h: float = 1e-6) -> float:
        """Central-difference consistency of the jacobian at random probes."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_points):
            x = rng.uniform(self.domain.lo, self.domain.hi)
            J = self.jac(x)
            F = np.zeros((self.dim, self.dim))
            for j in range(self.dim):
                e = np.zeros(self.dim)
                e[j] = h
                F[:, j] = (self(x + e) - self(x - e)) / (2 * h)
            scale = max(1.0, float(np.abs(J).max()))
            worst = max(worst, float(np.abs(F - J).max()) / scale)
        if worst > rel_tol:
            raise ValueError(f"jacobian disagrees with finite differences ({worst:.2e})")
        return worst


@dataclass
class DegreeQuery:
    map: MapWithJacobian
    target_center: np.ndarray
    target_radius: float
    regular_value: np.ndarray
    window: Box | None = None
    seeds_per_axis: int = 40
    newton_tol: float = 1e-10
    dedup_tol: float = 1e-7
    critical_det_tol: float = 1e-8
    boundary_samples: int = 2000

    def __post_init__(self):
        self.target_center = np.asarray(self.target_center, dtype=float)
        self.regular_value = np.asarray(self.regular_value, dtype=float)
        if self.window is None:
            self.window = self.map.domain
        if np.linalg.norm(self.regular_value - self.target_center) >= self.target_radius:
            raise ValueError("regular value must lie inside the target ball")
        if self.map.dim > 4:
            raise ValueError("grid seeding supports dimension <= 4 only")


def _find_preimages(q: DegreeQuery):
    f, d = q.map, q.map.dim
    seeds = q.window.grid(q.seeds_per_axis)
    y = q.regular_value
    X = seeds.copy()
    active = np.ones(len(X), dtype=bool)
    for _ in range(60):
        if not active.any():
            break
        Fa = _batch_eval(f.eval, X[active]) - y
        res = np.linalg.norm(Fa, axis=1)
        conv = res <= q.newton_tol
        Ja = _batch_jac(f.jacobian, X[active], d)
        ok = np.abs(np.linalg.det(Ja)) > 1e-14
        step = np.zeros_like(Fa)
        if ok.any():
            step[ok] = np.linalg.solve(Ja[ok], Fa[ok][..., None])[..., 0]
        # cap the step to stay numerically sane
        norms = np.linalg.norm(step, axis=1, keepdims=True)
        cap = float(np.max(q.window.hi - q.window.lo))
        step = np.where(norms > cap, step * (cap / np.maximum(norms, 1e-300)), step)
        Xa = X[active]
        Xa[~conv] -= step[~conv]
        X[active] = Xa
        newly_done = conv | ~ok
        idx = np.where(active)[0]
        active[idx[newly_done]] = False
    # collect converged in-window roots
    F = _batch_eval(f.eval, X) - y
    res = np.linalg.norm(F, axis=1)
    good = res <= q.newton_tol * 10
    roots = []
    for x in X[good]:
        if not q.window.contains(x, margin=0.0):
            continue
        if any(np.linalg.norm(x - r0) <= q.dedup_tol for r0 in roots):
            continue
        roots.append(x)
    return roots


def degree(q: DegreeQuery) -> int:
    """Signed preimage count of the regular value."""
    # properness gate: boundary image stays outside the closed target ball
    bd = q.window.boundary_samples(q.boundary_samples)
    img = _batch_eval(q.map.eval, bd)
    dist = np.linalg.norm(img - q.target_center, axis=1)
    if np.any(dist <= q.target_radius):
        raise PropernessViolation(
            f"window boundary image enters the target ball (min distance {dist.min():.3g})")
    total = 0
    for x in _find_preimages(q):
        det = float(np.linalg.det(q.map.jac(x)))
        if abs(det) < q.critical_det_tol:
            raise NearCriticalValue(f"|det| = {abs(det):.3g} at preimage {x}")
        total += 1 if det > 0 else -1
    return total


def degree_stability(f: MapWithJacobian, g: MapWithJacobian, r: float, R: float,
                     regular_value=None, samples_per_axis: int = 25):
    """Compare two degrees under a sampled sup-distance hypothesis.

    Certifies equality only when the sampled distance between the maps
    stays below r/2 on the common window.
    """
    if not r < R:
        raise ValueError("need r < R")
    lo = np.maximum(f.domain.lo, g.domain.lo)
    hi = np.minimum(f.domain.hi, g.domain.hi)
    common = Box(lo, hi)
    X = common.grid(samples_per_axis)
    dist = np.linalg.norm(_batch_eval(f.eval, X) - _batch_eval(g.eval, X), axis=1)
    if float(dist.max()) >= r / 2:
        raise HypothesisUnverified(
            f"sampled distance {dist.max():.3g} is not below r/2 = {r / 2:.3g}")
    y = np.zeros(f.dim) if regular_value is None else np.asarray(regular_value, dtype=float)
    qf = DegreeQuery(f, np.zeros(f.dim), R, y, window=common)
    qg = DegreeQuery(g, np.zeros(g.dim), R, y, window=common)
    df, dg = degree(qf), degree(qg)
    if df != dg:
        raise AssertionError(
            f"certified hypothesis but degrees differ: {df} vs {dg}")
    return df, dg, True


def slice_degree_invariance(family, t_grid=None, regular_value=None,
                            target_radius: float = 0.5):
    """Degrees of a fibered family along a parameter grid, with verdict.

    family(t) must return a MapWithJacobian on a fixed window.
    """
    ts = np.linspace(0.0, 1.0, 11) if t_grid is None else np.asarray(t_grid, dtype=float)
    degrees = []
    for t in ts:
        f = family(float(t))
        y = np.zeros(f.dim) if regular_value is None else np.asarray(regular_value, dtype=float)
        degrees.append(degree(DegreeQuery(f, y, target_radius, y)))
    return list(ts), degrees, len(set(degrees)) == 1


def graph_projection_degree(graph, r: float, A: float,
                            seeds_per_axis: int = 25,
                            window_samples: int = 4000,
                            regular_value=None) -> int:
    """Degree of the base projection of a twisted graph over the r-ball.

    graph carries a phase-space map phi with jacobian; the base map sends
    (x; xi) to (x, x') with (x'; xi') = phi(x; xi).  The window bound on
    the twisted fibers is sampled first and violations are reported.
    """
    phi: MapWithJacobian = graph.phi
    d = phi.dim
    n = d // 2

    def base_eval(z):
        z = np.asarray(z, dtype=float)
        out = phi.eval(z)
        if z.ndim == 1:
            return np.concatenate([z[:n], np.asarray(out)[:n]])
        return np.concatenate([z[:, :n], np.asarray(out)[:, :n]], axis=1)

    def base_jac(z):
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            J = phi.jac(z)
            top = np.concatenate([np.eye(n), np.zeros((n, n))], axis=1)
            return np.concatenate([top, J[:n, :]], axis=0)
        Js = _batch_jac(phi.jacobian, z, d)
        out = np.zeros((len(z), d, d))
        out[:, :n, :n] = np.eye(n)
        out[:, n:, :] = Js[:, :n, :]
        return out

    # sampled window bound: twisted fibers over the r-ball must not fill
    # the outer shell between 2Ar and 3Ar
    rng = np.random.default_rng(11)
    Z = rng.uniform(phi.domain.lo, phi.domain.hi, size=(window_samples, d))
    out = _batch_eval(phi.eval, Z)
    base = np.concatenate([Z[:, :n], out[:, :n]], axis=1)
    fiber = np.concatenate([Z[:, n:], -out[:, n:]], axis=1)
    b_n, f_n = np.linalg.norm(base, axis=1), np.linalg.norm(fiber, axis=1)
    bad = (b_n < r) & (f_n < 3 * A * r) & (f_n > 2 * A * r + 1e-12)
    if bad.any():
        raise WindowBoundViolated(
            f"{int(bad.sum())} graph samples land in the excluded fiber shell")
    base_map = MapWithJacobian(base_eval, base_jac, phi.domain, d,
                               name=f"base-projection({phi.name})")
    y = np.zeros(d) if regular_value is None else np.asarray(regular_value, dtype=float)
    q = DegreeQuery(base_map, np.zeros(d), r, y, seeds_per_axis=seeds_per_axis)
    return degree(q)
