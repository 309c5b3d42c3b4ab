"""Built-in map families for the rigidity pipeline.

Each family is a sequence of symplectic maps converging uniformly to a
symplectic limit, with the deviation of the n-th map controlled by the
configured error schedule.
"""

from __future__ import annotations

import numpy as np

from ..degree import Box, MapWithJacobian
from ..symplectic import standard_form

FAMILY_NAMES = ("linear_rotation", "shear", "oscillatory_hamiltonian", "custom")


def linear_map(M, dom: float, name: str = "") -> MapWithJacobian:
    M = np.asarray(M, dtype=float)
    d = M.shape[0]

    def ev(z):
        return np.asarray(z, dtype=float) @ M.T

    def jac(z):
        z = np.asarray(z)
        return M if z.ndim == 1 else np.tile(M, (len(z), 1, 1))

    return MapWithJacobian(ev, jac, Box.cube(dom, d), d, name=name)


def rotation_matrix(theta: float, n: int) -> np.ndarray:
    d = 2 * n
    M = np.zeros((d, d))
    c, s = np.cos(theta), np.sin(theta)
    for i in range(n):
        M[i, i] = c
        M[i, n + i] = s
        M[n + i, i] = -s
        M[n + i, n + i] = c
    return M


def shear_matrix(s: float, n: int) -> np.ndarray:
    d = 2 * n
    M = np.eye(d)
    M[:n, n:] = s * np.eye(n)
    return M


def hamiltonian_flow_map(grad_H, hess_H, n: int, dom: float,
                         steps: int = 200, name: str = "") -> MapWithJacobian:
    """Time-one RK4 flow of an autonomous Hamiltonian with jacobians
    propagated by the variational equation."""
    d = 2 * n
    O = standard_form(n)

    def vel(Z):
        return grad_H(Z) @ O.T

    def ev(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z).copy()
        dt = 1.0 / steps
        for _ in range(steps):
            k1 = vel(Z)
            k2 = vel(Z + dt / 2 * k1)
            k3 = vel(Z + dt / 2 * k2)
            k4 = vel(Z + dt * k3)
            Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return Z[0] if single else Z

    def jac(z):
        z = np.asarray(z, dtype=float)
        single = z.ndim == 1
        Z = np.atleast_2d(z).copy()
        Jm = np.tile(np.eye(d), (len(Z), 1, 1))
        dt = 1.0 / steps

        def acc(Zc, Jc):
            A = np.einsum("ij,njk->nik", O, hess_H(Zc))
            return vel(Zc), np.einsum("nij,njk->nik", A, Jc)

        for _ in range(steps):
            k1, K1 = acc(Z, Jm)
            k2, K2 = acc(Z + dt / 2 * k1, Jm + dt / 2 * K1)
            k3, K3 = acc(Z + dt / 2 * k2, Jm + dt / 2 * K2)
            k4, K4 = acc(Z + dt * k3, Jm + dt * K3)
            Z = Z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            Jm = Jm + dt / 6 * (K1 + 2 * K2 + 2 * K3 + K4)
        return Jm[0] if single else Jm

    return MapWithJacobian(ev, jac, Box.cube(dom, d), d, name=name)


def _oscillatory_grad_hess(n: int, amp: float):
    """H(z) = 0.2 sum x_i xi_i + amp * sum sin(x_i) sin(xi_i)."""
    def grad(Z):
        Z = np.atleast_2d(Z)
        x, xi = Z[:, :n], Z[:, n:]
        gx = 0.2 * xi + amp * np.cos(x) * np.sin(xi)
        gxi = 0.2 * x + amp * np.sin(x) * np.cos(xi)
        return np.concatenate([gx, gxi], axis=1)

    def hess(Z):
        Z = np.atleast_2d(Z)
        x, xi = Z[:, :n], Z[:, n:]
        d = 2 * n
        H = np.zeros((len(Z), d, d))
        for i in range(n):
            H[:, i, i] = -amp * np.sin(x[:, i]) * np.sin(xi[:, i])
            H[:, n + i, n + i] = -amp * np.sin(x[:, i]) * np.sin(xi[:, i])
            H[:, i, n + i] = 0.2 + amp * np.cos(x[:, i]) * np.cos(xi[:, i])
            H[:, n + i, i] = H[:, i, n + i]
        return H

    return grad, hess


def _custom_grad_hess(expr: str, n: int):
    import sympy as sp

    xs = sp.symbols(f"x1:{n + 1}")
    xis = sp.symbols(f"xi1:{n + 1}")
    H = sp.sympify(expr, locals={s.name: s for s in xs + xis})
    sym = list(xs) + list(xis)
    grads = [sp.diff(H, s) for s in sym]
    hessians = [[sp.diff(g, s) for s in sym] for g in grads]
    gfun = sp.lambdify(sym, grads, "numpy")
    hfun = sp.lambdify(sym, hessians, "numpy")

    def grad(Z):
        Z = np.atleast_2d(Z)
        vals = gfun(*[Z[:, i] for i in range(2 * n)])
        return np.stack([np.broadcast_to(v, (len(Z),)) for v in vals], axis=1).astype(float)

    def hess(Z):
        Z = np.atleast_2d(Z)
        rows = hfun(*[Z[:, i] for i in range(2 * n)])
        out = np.zeros((len(Z), 2 * n, 2 * n))
        for i in range(2 * n):
            for j in range(2 * n):
                out[:, i, j] = np.broadcast_to(rows[i][j], (len(Z),))
        return out

    return grad, hess


def build_family(family: str, n: int, N: int, schedule, dom: float = 3.0,
                 custom_h: str | None = None, flow_steps: int = 200):
    """Returns (phi_inf, phi_of_n) for the requested family."""
    if family == "linear_rotation":
        theta = 1.0

        def phi_of_n(k: int):
            return linear_map(rotation_matrix(theta + schedule(k), n), dom, f"rot[{k}]")

        return linear_map(rotation_matrix(theta, n), dom, "rot[inf]"), phi_of_n

    if family == "shear":
        s = 0.5

        def phi_of_n(k: int):
            return linear_map(shear_matrix(s + schedule(k), n), dom, f"shear[{k}]")

        return linear_map(shear_matrix(s, n), dom, "shear[inf]"), phi_of_n

    if family == "oscillatory_hamiltonian":
        g0, h0 = _oscillatory_grad_hess(n, 0.05)
        phi_inf = hamiltonian_flow_map(g0, h0, n, dom, flow_steps, "osc[inf]")

        def phi_of_n(k: int):
            gk, hk = _oscillatory_grad_hess(n, 0.05 + 0.05 * schedule(k))
            return hamiltonian_flow_map(gk, hk, n, dom, flow_steps, f"osc[{k}]")

        return phi_inf, phi_of_n

    if family == "custom":
        if not custom_h:
            raise ValueError("custom family needs an H expression")
        g0, h0 = _custom_grad_hess(custom_h, n)
        phi_inf = hamiltonian_flow_map(g0, h0, n, dom, flow_steps, "custom[inf]")

        def phi_of_n(k: int):
            def grad_k(Z, e=schedule(k)):
                return (1.0 + e) * g0(Z)

            def hess_k(Z, e=schedule(k)):
                return (1.0 + e) * h0(Z)

            return hamiltonian_flow_map(grad_k, hess_k, n, dom, flow_steps, f"custom[{k}]")

        return phi_inf, phi_of_n

    raise ValueError(f"unknown family {family!r}; choose from {FAMILY_NAMES}")
