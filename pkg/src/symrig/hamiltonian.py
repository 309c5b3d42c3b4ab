"""Hamiltonian isotopies and their reconstruction from a symplectic map.

A map fixing the origin with identity differential is written through a
position-momentum generating function, blended into the identity chart
near the origin, and connected to the identity by interpolating the
generating functions.  The driving Hamiltonian is recovered by radial
integration of the isotopy's velocity field and cut off outside a
compact box, so the returned isotopy is exactly stationary far away.

Hamiltonian convention: X_H = Omega grad H, i.e. iota_{X_H} omega = dH.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RegularGridInterpolator

from .degree import Box, MapWithJacobian, _batch_eval, _batch_jac
from .errors import BlendWidthNotFound, GraphConditionFailed
from .symplectic import standard_form


def smoothstep(t):
    """C^infty step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 2.0)
    def g(u):
        with np.errstate(over="ignore", divide="ignore"):
            return np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
    a, b = g(t), g(1.0 - t)
    return a / (a + b)


@dataclass
class HamiltonianIsotopy:
    """Time-dependent Hamiltonian with a fixed-step RK4 flow."""

    H: callable                 # (Z, t) -> values, batched in Z
    grad_H: callable            # (Z, t) -> gradients, batched
    support: Box
    dim: int
    step_count: int = 80

    def vanishes_outside_support(self, points, times) -> float:
        worst = 0.0
        for t in times:
            worst = max(worst, float(np.abs(self.H(np.atleast_2d(points), t)).max()))
        return worst

    def velocity(self, Z, t):
        O = standard_form(self.dim // 2)
        return self.grad_H(np.atleast_2d(Z), t) @ O.T

    def flow(self, Z, t0: float = 0.0, t1: float = 1.0, steps: int | None = None):
        Z = np.atleast_2d(np.asarray(Z, dtype=float)).copy()
        steps = steps or self.step_count
        dt = (t1 - t0) / steps
        t = t0
        for _ in range(steps):
            k1 = self.velocity(Z, t)
            k2 = self.velocity(Z + dt / 2 * k1, t + dt / 2)
            k3 = self.velocity(Z + dt / 2 * k2, t + dt / 2)
            k4 = self.velocity(Z + dt * k3, t + dt)
            Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
        return Z


# ---------------------------------------------------------------------------
# generating-function machinery
# ---------------------------------------------------------------------------

class _GFChart:
    """Position-momentum generating data of a symplectic map.

    Solves phi(x; xi) = (x'; b) for xi given (x, b); the gradient of the
    generating function at (x, b) is (xi, x').
    """

    def __init__(self, phi: MapWithJacobian, newton_tol=1e-12, max_iter=60):
        self.phi = phi
        self.d = phi.dim
        self.n = phi.dim // 2
        self.tol = newton_tol
        self.max_iter = max_iter

    def solve_momentum(self, X, B):
        """xi with momentum(phi(x; xi)) = b, batched; also returns x'."""
        n, d = self.n, self.d
        X = np.atleast_2d(X)
        B = np.atleast_2d(B)
        xi = B.copy()   # identity-differential initial guess
        for _ in range(self.max_iter):
            Z = np.concatenate([X, xi], axis=1)
            out = _batch_eval(self.phi.eval, Z)
            res = out[:, n:] - B
            if float(np.abs(res).max()) <= self.tol:
                break
            J = _batch_jac(self.phi.jacobian, Z, d)[:, n:, n:]
            dets = np.abs(np.linalg.det(J))
            if np.any(dets < 1e-10):
                raise GraphConditionFailed(
                    "momentum block of the differential is singular; no chart")
            xi = xi - np.linalg.solve(J, res[..., None])[..., 0]
        else:
            raise GraphConditionFailed("momentum solve did not converge")
        Z = np.concatenate([X, xi], axis=1)
        out = _batch_eval(self.phi.eval, Z)
        return xi, out[:, :n]

    def grad(self, W):
        """Gradient (d_x f, d_b f) = (xi, x') at rows (x, b)."""
        W = np.atleast_2d(W)
        xi, xp = self.solve_momentum(W[:, :self.n], W[:, self.n:])
        return np.concatenate([xi, xp], axis=1)

    def value(self, W, quad: int = 24):
        """Scalar generating function by radial quadrature, f(0) = 0."""
        W = np.atleast_2d(W)
        x, w = leggauss(quad)
        x = (x + 1) / 2
        w = w / 2
        acc = np.zeros(len(W))
        for t, wt in zip(x, w):
            g = self.grad(t * W)
            acc += wt * np.einsum("ni,ni->n", g, W)
        return acc


def _generated_map_factory(grad_ft, n, tol=1e-12, max_iter=60):
    """Forward/backward maps of the symplectomorphism generated by f_t.

    grad_ft(W, t) returns (d_x f, d_b f) rows; forward solves d_x f = xi
    in b, backward solves d_b f = x' in x.
    """

    def _newton(solve_block, X_fixed, target, guess, t):
        cur = guess.copy()
        h = 1e-6
        for _ in range(max_iter):
            val = solve_block(X_fixed, cur, t)
            res = val - target
            if float(np.abs(res).max()) <= tol:
                return cur
            # finite-difference jacobian in the unknown block, batched
            Jcols = []
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                Jcols.append((solve_block(X_fixed, cur + e, t)
                              - solve_block(X_fixed, cur - e, t)) / (2 * h))
            J = np.stack(Jcols, axis=-1)
            dets = np.abs(np.linalg.det(J))
            if np.any(dets < 1e-12):
                raise GraphConditionFailed("generated map chart degenerated")
            cur = cur - np.linalg.solve(J, res[..., None])[..., 0]
        raise GraphConditionFailed("generated map solve did not converge")

    def dx_block(X, B, t):
        return grad_ft(np.concatenate([X, B], axis=1), t)[:, :n]

    def db_block(X, B, t):
        return grad_ft(np.concatenate([X, B], axis=1), t)[:, n:]

    def forward(Z, t):
        Z = np.atleast_2d(Z)
        X, Xi = Z[:, :n], Z[:, n:]
        B = _newton(lambda Xf, cur, tt: dx_block(Xf, cur, tt), X, Xi, Xi, t)
        Xp = db_block(X, B, t)
        return np.concatenate([Xp, B], axis=1)

    def backward(Zp, t):
        Zp = np.atleast_2d(Zp)
        Xp, B = Zp[:, :n], Zp[:, n:]
        X = _newton(lambda Bf, cur, tt: db_block(cur, Bf, tt), B, Xp, Xp, t)
        Xi = dx_block(X, B, t)
        return np.concatenate([X, Xi], axis=1)

    return forward, backward


def ham_isotopy_from_map(phi: MapWithJacobian, r: float, eps: float,
                         blend_widths=None, space_grid: int = 81,
                         time_grid: int = 17, quad: int = 16,
                         seed: int = 9) -> HamiltonianIsotopy:
    """Compactly supported isotopy whose time-one map approximates phi on
    the r-ball.

    Requires phi(0) = 0 and dphi_0 = id (run the normalization first).
    The generating function is blended into the identity chart on a
    small ball; the blend width is searched downward until the time-one
    map stays eps-close to phi on the r-ball.
    """
    d = phi.dim
    n = d // 2
    z0 = np.zeros(d)
    if float(np.abs(phi(z0)).max()) > 1e-9:
        raise GraphConditionFailed("need phi(0) = 0; translate or normalize first")
    if float(np.abs(phi.jac(z0) - np.eye(d)).max()) > 0.5:
        raise GraphConditionFailed("differential at 0 too far from the identity; normalize first")
    chart = _GFChart(phi)

    def pairing(W):
        return np.einsum("ni,ni->n", W[:, :n], W[:, n:])

    def grad_pairing(W):
        return np.concatenate([W[:, n:], W[:, :n]], axis=1)

    widths = blend_widths if blend_widths is not None else [r / 16, r / 32, r / 64, r / 128]
    rng = np.random.default_rng(seed)
    test_pts = rng.uniform(-r, r, size=(200, d))
    test_pts = test_pts[np.linalg.norm(test_pts, axis=1) < r]

    chosen = None
    for eta in widths:
        lo, hi = 2 * eta, 4 * eta

        def chi(W):
            rho = np.linalg.norm(W, axis=1)
            return smoothstep((hi - rho) / (hi - lo))

        def grad_ft(W, t):
            W = np.atleast_2d(W)
            g_f = chart.grad(W)
            g_p = grad_pairing(W)
            f_v = chart.value(W)
            p_v = pairing(W)
            c = chi(W)
            rho = np.linalg.norm(W, axis=1)
            # grad chi = chi'(s) * d s/d W with s = (hi - rho)/(hi - lo)
            h = 1e-6
            sp = (smoothstep((hi - (rho + h)) / (hi - lo))
                  - smoothstep((hi - (rho - h)) / (hi - lo))) / (2 * h)
            with np.errstate(invalid="ignore", divide="ignore"):
                gchi = np.where(rho[:, None] > 1e-12, sp[:, None] * W / np.maximum(rho, 1e-12)[:, None], 0.0)
            # f' = f + chi (p - f); f_t = p + t (f' - p) = p + t (1 - chi)(f - p)
            diff = f_v - p_v
            gdiff = g_f - g_p
            grad_fp = g_f + gchi * (p_v - f_v)[:, None] + c[:, None] * (g_p - g_f)
            return g_p + t * (grad_fp - g_p)

        forward, backward = _generated_map_factory(grad_ft, n)
        try:
            out1 = forward(test_pts, 1.0)
            target = _batch_eval(phi.eval, test_pts)
            gap = float(np.linalg.norm(out1 - target, axis=1).max())
        except GraphConditionFailed:
            continue
        if gap <= eps:
            chosen = (eta, forward, backward, grad_ft)
            break
    if chosen is None:
        raise BlendWidthNotFound(
            f"no blend width in {widths} reaches eps = {eps} on the r-ball")
    eta, forward, backward, grad_ft = chosen

    # velocity field on a grid: Y_t = (d_t psi_t) o psi_t^{-1}
    ts = np.linspace(0.0, 1.0, time_grid)
    dt_fd = 1.0 / (4 * (time_grid - 1))

    # the flow of the r-ball stays within a modest margin of phi's range
    sweep = np.concatenate([test_pts, forward(test_pts, 1.0), forward(test_pts, 0.5)])
    half_w = 1.5 * max(float(np.abs(sweep).max()), r) + 4 * eta
    box = Box.cube(half_w, d)
    support = Box.cube(1.5 * half_w, d)
    axes = [np.linspace(box.lo[i], box.hi[i], space_grid) for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)

    O = standard_form(n)
    gH_grids = []      # grad H on (grid, t)
    for t in ts:
        t_lo, t_hi = max(0.0, t - dt_fd), min(1.0, t + dt_fd)
        back = backward(pts, t)
        vel = (forward(back, t_hi) - forward(back, t_lo)) / (t_hi - t_lo)
        gH_grids.append(-(vel @ O.T))   # grad H = -Omega Y
    gH = np.stack(gH_grids, axis=0)    # (T, N, d)

    interp = [RegularGridInterpolator(tuple(axes) + (ts,),
                                      np.moveaxis(gH[:, :, j].reshape((time_grid,) + tuple([space_grid] * d)), 0, -1),
                                      method="linear", bounds_error=False, fill_value=0.0)
              for j in range(d)]

    # scalar H by radial integration of the gradient field, then cut off
    qx, qw = leggauss(quad)
    qx = (qx + 1) / 2
    qw = qw / 2

    cut_lo, cut_hi = half_w, 1.4 * half_w

    def cut(Z):
        rho = np.abs(np.atleast_2d(Z)).max(axis=1)
        return smoothstep((cut_hi - rho) / (cut_hi - cut_lo))

    def theta(t):
        # freeze the flow after time 1, vanish beyond time 2
        return float(smoothstep(2.0 - t)) if t > 1 else 1.0

    def grad_H_raw(Z, t):
        Z = np.atleast_2d(Z)
        tq = np.full((len(Z), 1), np.clip(t, 0.0, 1.0))
        P = np.concatenate([Z, tq], axis=1)
        return np.stack([interp[j](P) for j in range(d)], axis=-1)

    def H_raw(Z, t):
        Z = np.atleast_2d(Z)
        acc = np.zeros(len(Z))
        for s, w in zip(qx, qw):
            g = grad_H_raw(s * Z, t)
            acc += w * np.einsum("ni,ni->n", g, Z)
        return acc

    def H(Z, t):
        th = theta(t)
        if th == 0.0:
            return np.zeros(len(np.atleast_2d(Z)))
        return th * cut(Z) * H_raw(Z, min(t, 1.0))

    h_g = 1e-5 * max(r, 1.0)

    def grad_H(Z, t):
        Z = np.atleast_2d(Z)
        out = np.zeros_like(Z)
        for j in range(d):
            e = np.zeros(d)
            e[j] = h_g
            out[:, j] = (H(Z + e, t) - H(Z - e, t)) / (2 * h_g)
        return out

    return HamiltonianIsotopy(H=H, grad_H=grad_H, support=support, dim=d)
