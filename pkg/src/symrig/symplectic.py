"""Linear symplectic checks, normalization, and graph-window bookkeeping.

Conventions: phase space R^{2n} with coordinates z = (x, xi), symplectic
form omega(v, w) = v^T Omega w for Omega = [[0, -I], [I, 0]], and
Hamiltonian vector fields X_H = Omega grad H.  Twisted graphs carry the
fiber sign flip on the second factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .degree import Box, MapWithJacobian, _batch_eval
from .errors import (
    NotLagrangian,
    OddDimension,
    PreconditionViolated,
    RankDeficientBasis,
    SingularDifferential,
    ZeroSigma,
)
from .exactla import is_exactly_representable, rational_rank


def standard_form(n: int) -> np.ndarray:
    O = np.zeros((2 * n, 2 * n))
    O[:n, n:] = -np.eye(n)
    O[n:, :n] = np.eye(n)
    return O


@dataclass(frozen=True)
class SymplecticSpace:
    n: int

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def omega(self) -> np.ndarray:
        return standard_form(self.n)


def symplectic_residual(phi: MapWithJacobian, points) -> float:
    """Max-abs-entry norm of J^T Omega J - Omega over the sample points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = points.shape[1]
    if d % 2 != 0:
        raise OddDimension("phase space dimension must be even")
    O = standard_form(d // 2)
    worst = 0.0
    for x in points:
        J = phi.jac(x)
        worst = max(worst, float(np.abs(J.T @ O @ J - O).max()))
    return worst


# ---------------------------------------------------------------------------
# coisotropy of linear subspaces
# ---------------------------------------------------------------------------

def _rank(M, exact: bool) -> int:
    M = np.atleast_2d(M)
    if M.size == 0:
        return 0
    if exact:
        return rational_rank([[Fraction(x).limit_denominator(10**12) if not isinstance(x, Fraction) else x
                               for x in row] for row in np.asarray(M, dtype=object).tolist()])
    return int(np.linalg.matrix_rank(np.asarray(M, dtype=float), tol=1e-10))


def coisotropic_check(W, space: SymplecticSpace) -> bool:
    """True iff the omega-orthogonal of span(W) is contained in span(W).

    W holds a basis as columns.  Exact rank arithmetic is used when the
    entries are integers or rationals, SVD thresholds otherwise.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if W.shape[0] != space.dim:
        raise RankDeficientBasis(f"basis lives in R^{W.shape[0]}, space has dim {space.dim}")
    exact = is_exactly_representable(W)
    k = _rank(W, exact)
    if k != W.shape[1]:
        raise RankDeficientBasis("columns are not independent")
    O = space.omega
    # W^{perp omega} = ker(W^T Omega); containment via rank stability
    ker = _nullspace_cols(W.T @ O, exact)
    if ker.shape[1] == 0:
        return True
    return _rank(np.concatenate([W, ker], axis=1), exact) == k


def _nullspace_cols(M, exact: bool) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if exact:
        # exact kernel via fraction elimination
        rows = [[Fraction(x).limit_denominator(10**12) for x in row] for row in M.tolist()]
        m, n = len(rows), len(rows[0])
        piv_cols = []
        r = 0
        for c in range(n):
            piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            inv = 1 / rows[r][c]
            rows[r] = [v * inv for v in rows[r]]
            for i in range(m):
                if i != r and rows[i][c] != 0:
                    f = rows[i][c]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            piv_cols.append(c)
            r += 1
        free = [c for c in range(n) if c not in piv_cols]
        basis = np.zeros((n, len(free)))
        for k, c in enumerate(free):
            basis[c, k] = 1.0
            for i, pc in enumerate(piv_cols):
                basis[pc, k] = float(-rows[i][c])
        return basis
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > 1e-10))
    return vt[rank:].T


def rho_lift_check(S, sigma0: float, xi0):
    """Coisotropy of a linear subspace against its conic lift.

    The lift adds the base/scale pair and is linearized through
    d rho(X, S; Xi, Sigma) = (X; Xi/sigma0 - xi0 Sigma/sigma0^2).
    Returns (coisotropic downstairs, coisotropic upstairs, equal).
    """
    if sigma0 == 0:
        raise ZeroSigma("the lift is only defined away from sigma = 0")
    S = np.atleast_2d(np.asarray(S, dtype=float))
    dim = S.shape[0]
    n = dim // 2
    xi0 = np.asarray(xi0, dtype=float)
    down = coisotropic_check(S, SymplecticSpace(n))

    # coordinates upstairs: (x, s, xi, sigma); d rho as a linear map
    L = np.zeros((dim, dim + 2))
    L[:n, :n] = np.eye(n)
    L[n:, n + 1:n + 1 + n] = np.eye(n) / sigma0
    L[n:, -1] = -xi0 / sigma0**2
    # preimage of span(S): kernel of (proj onto S-complement) o L
    comp = _nullspace_cols(S.T, is_exactly_representable(S))
    if comp.shape[1] == 0:
        lift_basis = np.eye(dim + 2)
    else:
        lift_basis = _nullspace_cols(comp.T @ L, False)
    up = coisotropic_check(lift_basis, SymplecticSpace(n + 1))
    return down, up, down == up


def lagrangian_complement(L) -> np.ndarray:
    """A Lagrangian subspace transversal to the given Lagrangian.

    Rotation by the symplectic form does it: omega-isotropy is preserved
    and a common vector would have to be null for the inner product.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    dim, k = L.shape
    space = SymplecticSpace(dim // 2)
    if k != dim // 2 or not coisotropic_check(L, space) or \
            float(np.abs(L.T @ space.omega @ L).max()) > 1e-10:
        raise NotLagrangian("input basis is not Lagrangian")
    Lp, _ = np.linalg.qr(space.omega @ L)
    return Lp


# ---------------------------------------------------------------------------
# twisted graphs
# ---------------------------------------------------------------------------

@dataclass
class TwistedGraph:
    """A symplectic map with samples of its fiber-flipped graph."""

    phi: MapWithJacobian
    samples: np.ndarray = field(default=None)
    tol: float = 1e-10

    def __post_init__(self):
        if self.samples is None:
            rng = np.random.default_rng(5)
            pts = rng.uniform(self.phi.domain.lo, self.phi.domain.hi, size=(64, self.phi.dim))
            self.samples = self.sample_points(pts)
        else:
            self.verify_samples()

    @property
    def half_dim(self) -> int:
        return self.phi.dim // 2

    def sample_points(self, pts) -> np.ndarray:
        """Rows (x, xi, x', xi') with (x'; xi') = phi(x; xi)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = _batch_eval(self.phi.eval, pts)
        return np.concatenate([pts, out], axis=1)

    def verify_samples(self):
        d = self.phi.dim
        pts = self.samples[:, :d]
        out = _batch_eval(self.phi.eval, pts)
        err = float(np.abs(out - self.samples[:, d:]).max())
        if err > self.tol:
            raise ValueError(f"graph samples violate the map by {err:.3g}")

    def twisted_rows(self, pts=None) -> np.ndarray:
        """Rows (x, x', xi, -xi') of the twisted graph."""
        data = self.samples if pts is None else self.sample_points(pts)
        n, d = self.half_dim, self.phi.dim
        x, xi = data[:, :n], data[:, n:d]
        xp, xip = data[:, d:d + n], data[:, d + n:]
        return np.concatenate([x, xp, xi, -xip], axis=1)


# ---------------------------------------------------------------------------
# normalization into a bounded-graph chart
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizationData:
    u: np.ndarray
    v: np.ndarray
    A: float
    r0: float

    def check(self, tol: float = 1e-12):
        n = self.u.shape[0] // 2
        O = standard_form(n)
        for M in (self.u, self.v):
            if float(np.abs(M.T @ O @ M - O).max()) > tol:
                raise ValueError("normalization matrices are not symplectic")
        return self


def _symplectic_basis_from_lagrangian(A: np.ndarray) -> np.ndarray:
    """Extend a Lagrangian basis (columns) to a symplectic matrix [A | B]."""
    n2 = A.shape[0]
    O = standard_form(n2 // 2)
    B = O @ A @ np.linalg.inv(A.T @ A)
    return np.concatenate([A, B], axis=1)


def normalized_map(phi: MapWithJacobian, data: NormalizationData) -> MapWithJacobian:
    """v o phi o u with jacobians composed accordingly."""
    u, v = data.u, data.v
    uinv = np.linalg.inv(u)

    def ev(z):
        z = np.asarray(z, dtype=float)
        return (v @ np.asarray(phi.eval(z @ u.T if z.ndim > 1 else u @ z)).T).T \
            if z.ndim > 1 else v @ np.asarray(phi.eval(u @ z))

    def jac(z):
        z = np.asarray(z, dtype=float)
        if z.ndim > 1:
            J = np.stack([phi.jac(u @ p) for p in z])
            return np.einsum("ij,njk,kl->nil", v, J, u)
        return v @ phi.jac(u @ z) @ u

    lo = np.min(np.stack([uinv @ phi.domain.lo, uinv @ phi.domain.hi]), axis=0)
    hi = np.max(np.stack([uinv @ phi.domain.lo, uinv @ phi.domain.hi]), axis=0)
    box = Box(lo, hi)
    return MapWithJacobian(ev, jac, box, phi.dim, name=f"normalized({phi.name})")


def gen_pos_normalize(phi: MapWithJacobian, samples_per_axis: int = 20,
                      seed: int = 3) -> NormalizationData:
    """Linear symplectic changes of frame putting the graph in bounded position.

    The image of the horizontal Lagrangian under the differential at the
    origin is moved off the horizontal by sending one of its complements
    there; the slope bound doubles the operator norm of the resulting
    graph map, and the chart radius is found by bisection against
    sampled graph-bound and projection-invertibility conditions.
    """
    d = phi.dim
    n = d // 2
    D0 = phi.jac(np.zeros(d))
    if abs(np.linalg.det(D0)) < 1e-12:
        raise SingularDifferential("differential at the origin is singular")
    O = standard_form(n)
    u = np.eye(d)
    L = D0[:, :n]  # image of the horizontal Lagrangian

    rng = np.random.default_rng(seed)
    v = None
    for attempt in range(32):
        if attempt == 0:
            Lp = lagrangian_complement(L)
        else:
            S = rng.standard_normal((d, d))
            S = (S + S.T) / 2
            R = _expm(O @ S * 0.3)
            cand = R @ lagrangian_complement(L)
            # keep only genuine complements of L
            if abs(np.linalg.det(np.concatenate([L, cand], axis=1))) < 1e-8:
                continue
            Lp = np.linalg.qr(cand)[0]
        basis = _symplectic_basis_from_lagrangian(Lp)
        v_cand = np.linalg.inv(basis)
        # projection chart of the graph of v . D0 . u
        Dpsi = v_cand @ D0
        P = np.concatenate([np.eye(d)[:n], Dpsi[:n]], axis=0)
        if abs(np.linalg.det(P)) > 1e-8:
            if np.linalg.det(P) < 0:
                # orient the chart: negating a conjugate basis pair keeps the
                # frame symplectic and flips the projection orientation
                basis = basis.copy()
                basis[:, 0] *= -1
                basis[:, n] *= -1
                v_cand = np.linalg.inv(basis)
            v = v_cand
            break
    if v is None:
        raise SingularDifferential("no admissible frame found for the graph chart")
    Dpsi = v @ D0
    P = np.concatenate([np.eye(d)[:n], Dpsi[:n]], axis=0)
    Q = np.concatenate([np.eye(d)[n:], Dpsi[n:]], axis=0)
    w = Q @ np.linalg.inv(P)
    A = 2.0 * float(np.linalg.norm(w, 2))

    psi = normalized_map(phi, NormalizationData(u, v, A, 1.0))
    r_max = float(np.min(np.abs(np.concatenate([phi.domain.lo, phi.domain.hi])))) or 1.0

    def graph_ok(r0: float) -> bool:
        box = Box(np.concatenate([-r0 * np.ones(n), -A * r0 * np.ones(n)]),
                  np.concatenate([r0 * np.ones(n), A * r0 * np.ones(n)]))
        Z = box.grid(samples_per_axis)
        out = _batch_eval(psi.eval, Z)
        base = np.concatenate([Z[:, :n], out[:, :n]], axis=1)
        fib = np.concatenate([Z[:, n:], out[:, n:]], axis=1)
        bn = np.linalg.norm(base, axis=1)
        fn = np.linalg.norm(fib, axis=1)
        sel = (bn < r0) & (fn < A * r0)
        if np.any(fn[sel] > A * np.maximum(bn[sel], 1e-300)):
            return False
        # projection invertibility on the window
        for z in Z[:: max(1, len(Z) // 50)]:
            J = psi.jac(z)
            Pz = np.concatenate([np.eye(d)[:n], J[:n]], axis=0)
            if abs(np.linalg.det(Pz)) < 1e-8:
                return False
        return True

    lo_r, hi_r = 0.0, r_max
    if graph_ok(r_max):
        r0 = r_max
    else:
        for _ in range(40):
            mid = (lo_r + hi_r) / 2
            if graph_ok(mid):
                lo_r = mid
            else:
                hi_r = mid
        r0 = lo_r
    if r0 <= 0:
        raise SingularDifferential("no positive chart radius satisfies the graph bounds")
    return NormalizationData(u, v, A, r0).check(tol=1e-9)


def _expm(M: np.ndarray) -> np.ndarray:
    from scipy.linalg import expm
    return expm(M)


# ---------------------------------------------------------------------------
# closeness window bookkeeping
# ---------------------------------------------------------------------------

def graph_window_check(psi: MapWithJacobian, psi1: MapWithJacobian,
                       r0: float, A: float, r: float, eps: float,
                       n_samples: int = 10_000, seed: int = 17) -> bool:
    """Window inclusion for a perturbed graph.

    Verifies the strict preconditions r < r0/4 and eps < A r / (A + 1),
    the three derived inequalities, the sampled closeness hypothesis,
    and finally the graph inclusion itself at sampled points.
    """
    if not 0 < r < r0 / 4:
        raise PreconditionViolated("need 0 < r < r0/4")
    if not 0 < eps < A * r / (A + 1):
        raise PreconditionViolated("need 0 < eps < A r/(A+1), strictly")
    chain = {
        "r + eps < r0": r + eps < r0,
        "A r0/2 + eps < A r0": A * r0 / 2 + eps < A * r0,
        "A (r + eps) + eps < 2 A r": A * (r + eps) + eps < 2 * A * r,
    }
    for name, ok in chain.items():
        if not ok:
            raise PreconditionViolated(name)
    d = psi.dim
    n = d // 2
    rng = np.random.default_rng(seed)
    U = np.concatenate([rng.uniform(-r0, r0, size=(n_samples, n)),
                        rng.uniform(-A * r0, A * r0, size=(n_samples, n))], axis=1)
    keep = (np.linalg.norm(U[:, :n], axis=1) < r0) & \
           (np.linalg.norm(U[:, n:], axis=1) < A * r0)
    U = U[keep]
    out = _batch_eval(psi.eval, U)
    out1 = _batch_eval(psi1.eval, U)
    gap = np.linalg.norm(out - out1, axis=1)
    if float(gap.max()) >= eps:
        return False
    # inclusion: twisted points of psi1 in the inner base/fiber window stay
    # inside the eps-tube of the psi graph and the 2Ar fiber ball
    base = np.concatenate([U[:, :n], out1[:, :n]], axis=1)
    fib = np.concatenate([U[:, n:], out1[:, n:]], axis=1)
    sel = (np.linalg.norm(base, axis=1) < r) & \
          (np.linalg.norm(fib, axis=1) < A * r0 / 2)
    if not np.any(sel):
        return True
    tube = gap[sel] < eps
    fiber_ok = np.linalg.norm(fib[sel], axis=1) <= 2 * A * r + 1e-12
    return bool(np.all(tube) and np.all(fiber_ok))
