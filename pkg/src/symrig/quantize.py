"""Generating-function quantization check.

A scalar S(x, y) with the convention xi = -dS/dx, xi' = +dS/dy cuts out
a Lagrangian: the epigraph indicator of S on the extended space has its
conic conormal locus projecting, through the scale map, onto exactly
that graph.  The check compares this projection against the twisted
graph of a given symplectic map on a grid, fiber by fiber.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degree import MapWithJacobian, _batch_eval, _batch_jac
from .errors import DegenerateGF


@dataclass
class GeneratingFunction:
    """S(x, y) with gradient access; x, y in R^n."""

    value: callable      # (N, 2n) -> (N,)
    gradient: callable   # (N, 2n) -> (N, 2n)
    n: int

    def grad(self, W):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        return np.asarray(self.gradient(W), dtype=float)

    def mixed_hessian_ok(self, W, h: float = 1e-6, tol: float = 1e-8) -> bool:
        """Nondegeneracy of d^2 S / dx dy at the probe points."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        n = self.n
        for w in W:
            M = np.zeros((n, n))
            for j in range(n):
                e = np.zeros(2 * n)
                e[n + j] = h
                M[:, j] = (self.grad(w + e)[0][:n] - self.grad(w - e)[0][:n]) / (2 * h)
            if abs(np.linalg.det(M)) < tol:
                return False
        return True


@dataclass
class QuantizationReport:
    max_discrepancy: float
    simple: bool
    n_grid: int
    failures: int


def conormal_rows(S: GeneratingFunction, W) -> np.ndarray:
    """Rows (x, y; -dS/dx, -dS/dy): the scaled conormal directions of the
    epigraph boundary, one per base point."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    g = S.grad(W)
    return np.concatenate([W, -g], axis=1)


def gf_quantization_check(S: GeneratingFunction, phi: MapWithJacobian,
                          grid, newton_tol: float = 1e-12,
                          max_iter: int = 60) -> QuantizationReport:
    """Compare the conormal projection of the epigraph sheaf with the
    twisted graph of phi over the base grid.

    For each (x, y) the momentum xi with position(phi(x; xi)) = y is
    located by Newton; the twisted fiber (xi, -xi') must match
    (-dS/dx, -dS/dy).  DegenerateGF is raised when either the mixed
    Hessian of S or the position block of dphi degenerates.
    """
    W = np.atleast_2d(np.asarray(grid, dtype=float))
    n = S.n
    d = 2 * n
    if not S.mixed_hessian_ok(W[:: max(1, len(W) // 16)]):
        raise DegenerateGF("mixed Hessian of S degenerates on the grid")

    rows = conormal_rows(S, W)
    xi = -rows[:, d:d + n].copy() * 0.0  # start at zero momentum
    X = W[:, :n]
    Y = W[:, n:]
    for _ in range(max_iter):
        Z = np.concatenate([X, xi], axis=1)
        out = _batch_eval(phi.eval, Z)
        res = out[:, :n] - Y
        if float(np.abs(res).max()) <= newton_tol:
            break
        J = _batch_jac(phi.jacobian, Z, d)[:, :n, n:]
        dets = np.abs(np.linalg.det(J))
        if np.any(dets < 1e-10):
            raise DegenerateGF("position block of the differential is singular; "
                               "no graph-type generating function exists")
        xi = xi - np.linalg.solve(J, res[..., None])[..., 0]
    else:
        raise DegenerateGF("fiber solve did not converge on the grid")
    Z = np.concatenate([X, xi], axis=1)
    out = _batch_eval(phi.eval, Z)
    xip = out[:, n:]
    twisted = np.concatenate([xi, -xip], axis=1)
    gap = np.linalg.norm(rows[:, d:] - twisted, axis=1)
    return QuantizationReport(
        max_discrepancy=float(gap.max()),
        simple=True,
        n_grid=len(W),
        failures=int(np.sum(gap > 1e-6)),
    )
