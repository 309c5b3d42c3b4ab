"""Deformation of an almost-symplectic map into a symplectic one.

The input is mollified to a smooth map, the defect 2-form is turned
into a primitive by the radial homotopy, and the time-one flow of the
vector field solving the interpolated-form equation is composed with
the mollification.  Everything is evaluated on a precomputed grid with
cubic interpolation, so the correction runs in seconds at phase-space
dimension two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RectBivariateSpline, RegularGridInterpolator

from .degree import Box, MapWithJacobian, _batch_eval, _batch_jac
from .errors import DegenerateOmegaT, MollificationTooCoarse
from .symplectic import standard_form


@dataclass
class MoserDiagnostics:
    width: float
    grid: int
    sigma: callable       # primitive 1-form, batched (N,d) -> (N,d)
    beta: callable        # defect 2-form as matrices, (N,d) -> (N,d,d)
    flow_steps: int


def _gauss_nodes_01(n):
    x, w = leggauss(n)
    return (x + 1) / 2, w / 2


def _bump_weights(m: int):
    """Tensor quadrature for a normalized compact bump on [-1,1]^per-axis."""
    x, w = leggauss(m)
    rho = np.exp(-1.0 / np.maximum(1e-12, 1.0 - x**2))
    rho[np.abs(x) >= 1.0] = 0.0
    wr = w * rho
    return x, wr / wr.sum()


def mollify(phi: MapWithJacobian, width: float, nodes: int = 8) -> MapWithJacobian:
    """Convolution with a normalized bump, by tensor quadrature.

    Exact on affine maps because the discrete weights are normalized and
    the nodes are symmetric.
    """
    d = phi.dim
    x1, w1 = _bump_weights(nodes)
    grids = np.meshgrid(*([x1] * d), indexing="ij")
    offs = width * np.stack([g.ravel() for g in grids], axis=-1)     # (M, d)
    ws = np.ones(offs.shape[0])
    for g in np.meshgrid(*([w1] * d), indexing="ij"):
        ws *= g.ravel()
    ws = ws / ws.sum()

    def ev(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        pts = (Z[:, None, :] - offs[None, :, :]).reshape(-1, d)
        vals = _batch_eval(phi.eval, pts).reshape(len(Z), -1, d)
        out = np.einsum("nmd,m->nd", vals, ws)
        return out[0] if single else out

    def jac(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        pts = (Z[:, None, :] - offs[None, :, :]).reshape(-1, d)
        vals = _batch_jac(phi.jacobian, pts, d).reshape(len(Z), -1, d, d)
        out = np.einsum("nmij,m->nij", vals, ws)
        return out[0] if single else out

    lo = phi.domain.lo + width
    hi = phi.domain.hi - width
    return MapWithJacobian(ev, jac, Box(lo, hi), d, name=f"mollified({phi.name})")


def _antisym_coords(d):
    return [(i, j) for i in range(d) for j in range(i + 1, d)]


def moser_correct(phi: MapWithJacobian, r: float, R: float, eps: float,
                  jac_modulus=None, grid: int = 101, quad_nodes: int = 32,
                  flow_steps: int = 40, residual_gate: float = 1e-2,
                  mollify_nodes: int = 8) -> MapWithJacobian:
    """Correct an almost-symplectic C^1 map to a symplectic one near 0.

    jac_modulus(h) bounds the oscillation of the jacobian over distance
    h and drives the mollification width; passing a number treats it as
    a Lipschitz constant of the jacobian.  The output is within eps of
    the input on the r-ball and carries diagnostics in .moser.
    """
    if not r < R:
        raise ValueError("need r < R")
    d = phi.dim
    n = d // 2
    O = standard_form(n)

    # mollification width from the modulus bound
    if jac_modulus is None:
        width = min(1e-3 * R, (R - r) / 8)
    else:
        mod = jac_modulus if callable(jac_modulus) else (lambda h, L=float(jac_modulus): L * h)
        width = (R - r) / 8
        target = min(eps / max(1.0, 4 * R), 1e-3)
        while width > 1e-12 and mod(width) > target:
            width /= 2
        if width <= 1e-12:
            raise MollificationTooCoarse("no admissible mollification width")

    phi_s = mollify(phi, width, nodes=mollify_nodes)
    r1 = (R + r) / 2
    box = Box.cube(min(r1, float(np.min(phi_s.domain.hi))), d)

    # defect form on the grid
    axes = [np.linspace(box.lo[i], box.hi[i], grid) for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    J = _batch_jac(phi_s.jacobian, pts, d)
    Aprime = np.einsum("nji,jk,nkl->nil", J, O, J)
    Bmat = Aprime - O
    shape = tuple([grid] * d)
    comps = _antisym_coords(d)

    def _field_interp(values_list):
        """Fast componentwise interpolants on the grid (spline at d=2)."""
        if d == 2:
            spl = [RectBivariateSpline(axes[0], axes[1], v.reshape(shape)) for v in values_list]
            return lambda Z: np.stack([s.ev(Z[:, 0], Z[:, 1]) for s in spl], axis=-1)
        rgi = [RegularGridInterpolator(axes, v.reshape(shape), method="linear",
                                       bounds_error=False, fill_value=None)
               for v in values_list]
        return lambda Z: np.stack([g(Z) for g in rgi], axis=-1)

    B_at = _field_interp([Bmat[:, i, j] for (i, j) in comps])

    def beta_at(Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        vals = B_at(Z)
        out = np.zeros((len(Z), d, d))
        for k, (i, j) in enumerate(comps):
            out[:, i, j] = vals[:, k]
            out[:, j, i] = -vals[:, k]
        return out

    # radial homotopy primitive sigma_x(v) = int_0^1 t beta_{tx}(x, v) dt
    qn, qw = _gauss_nodes_01(quad_nodes)

    def sigma_quadrature(Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        acc = np.zeros_like(Z)
        for t, w in zip(qn, qw):
            Bt = beta_at(t * Z)
            acc += w * t * np.einsum("nij,ni->nj", Bt, Z)
        return acc

    # precompute the primitive on the grid and interpolate it in the flow
    sigma_grid = sigma_quadrature(pts)
    S_at = _field_interp([sigma_grid[:, j] for j in range(d)])

    def sigma_at(Z):
        return S_at(np.atleast_2d(np.asarray(Z, dtype=float)))

    def X_field(t, Z):
        Z = np.atleast_2d(Z)
        At = O[None, :, :] + t * beta_at(Z)
        dets = np.abs(np.linalg.det(At))
        if np.any(dets < 1e-6):
            raise DegenerateOmegaT(f"interpolated form near-degenerate (|det| {dets.min():.2e})")
        sg = sigma_at(Z)
        # omega_t(X, .) = -sigma  as row covectors: X^T At = -sigma
        return np.linalg.solve(np.transpose(At, (0, 2, 1)), -sg[..., None])[..., 0]

    dt = 1.0 / flow_steps

    def flow_to_one(Z):
        Z = np.atleast_2d(np.asarray(Z, dtype=float)).copy()
        t = 0.0
        for _ in range(flow_steps):
            k1 = X_field(t, Z)
            k2 = X_field(t + dt / 2, Z + dt / 2 * k1)
            k3 = X_field(t + dt / 2, Z + dt / 2 * k2)
            k4 = X_field(t + dt, Z + dt * k3)
            Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        return Z

    def ev(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        out = _batch_eval(phi_s.eval, flow_to_one(np.atleast_2d(z)))
        return out[0] if single else out

    h_fd = 1e-4 * max(r, 1.0)

    def jac(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z)
        cols = []
        for j in range(d):
            e = np.zeros(d)
            e[j] = 1.0
            f1 = ev(Z + h_fd * e)
            f2 = ev(Z - h_fd * e)
            f3 = ev(Z + 2 * h_fd * e)
            f4 = ev(Z - 2 * h_fd * e)
            cols.append((8 * (f1 - f2) - (f3 - f4)) / (12 * h_fd))
        out = np.stack(cols, axis=-1)
        return out[0] if single else out

    corrected = MapWithJacobian(ev, jac, Box.cube(r, d), d, name=f"moser({phi.name})")
    corrected.moser = MoserDiagnostics(width=width, grid=grid, sigma=sigma_quadrature,
                                       beta=beta_at, flow_steps=flow_steps)
    return corrected
