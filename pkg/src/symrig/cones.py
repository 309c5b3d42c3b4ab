"""Round and polyhedral cones, and the regions of the cut-off argument.

Round cones are handled in closed form in the meridian plane (every
construction here is rotationally symmetric about the last axis), and
polyhedral cones by brute-force facet/ray enumeration at low dimension,
which keeps all dual descriptions exact up to floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InconsistentConeDescription,
    InvalidRegionParameters,
    ZeroCovector,
)


# ---------------------------------------------------------------------------
# round cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundCone:
    """{x_n <= -c ||x'||} for orientation "down", its negative for "up"."""

    slope: float
    dimension: int
    orientation: str = "down"

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("slope must be positive")
        if self.orientation not in ("down", "up"):
            raise ValueError("orientation must be 'down' or 'up'")
        if self.dimension < 2:
            raise ValueError("round cones need dimension >= 2")

    def _split(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x[:-1])), float(x[-1])

    def contains(self, x, tol: float = 0.0) -> bool:
        rho, z = self._split(x)
        if self.orientation == "down":
            return z <= -self.slope * rho + tol
        return z >= self.slope * rho - tol

    def boundary_distance(self, x) -> float:
        """Euclidean distance to the boundary surface (apex included)."""
        rho, z = self._split(x)
        zz = -z if self.orientation == "up" else z
        return _dist_point_ray((rho, zz), (1.0, -self.slope))

    def distance(self, x) -> float:
        if self.contains(x):
            return 0.0
        return self.boundary_distance(x)


def _dist_point_ray(p, d) -> float:
    p = np.asarray(p, dtype=float)
    d = np.asarray(d, dtype=float)
    d = d / np.linalg.norm(d)
    t = max(0.0, float(p @ d))
    return float(np.linalg.norm(p - t * d))


# ---------------------------------------------------------------------------
# polyhedral cones with twin descriptions
# ---------------------------------------------------------------------------

def _dedupe_rows(rows, tol=1e-9):
    out = []
    for r in rows:
        if not any(np.linalg.norm(r - s) <= tol for s in out):
            out.append(r)
    return out


def _normalize_rows(rows, tol=1e-12):
    out = []
    for r in rows:
        n = np.linalg.norm(r)
        if n > tol:
            out.append(np.asarray(r, dtype=float) / n)
    return out


def _facets_from_generators(gens, dim, tol=1e-9):
    """Half-space description {x : N x >= 0} of cone(gens), brute force."""
    gens = _normalize_rows(gens)
    if not gens:
        return np.vstack([np.eye(dim), -np.eye(dim)])
    G = np.array(gens)
    r = np.linalg.matrix_rank(G, tol=1e-9)
    normals = []
    # equalities pinning the span
    if r < dim:
        _, _, vt = np.linalg.svd(G, full_matrices=True)
        for v in vt[r:]:
            normals += [v, -v]
    # facets inside the span: orthogonal to r-1 generators
    for subset in itertools.combinations(range(len(gens)), max(r - 1, 0)):
        rows = [G[i] for i in subset]
        if r < dim:
            _, _, vt = np.linalg.svd(G, full_matrices=True)
            rows = list(rows) + list(vt[r:])
        M = np.array(rows) if rows else np.zeros((0, dim))
        ns = _nullspace(M)
        if ns.shape[1] != 1:
            continue
        h = ns[:, 0]
        for cand in (h, -h):
            vals = G @ cand
            if np.all(vals >= -tol):
                normals.append(cand / np.linalg.norm(cand))
    normals = _dedupe_rows(_normalize_rows(normals))
    # drop redundant half-spaces (keep equalities)
    return np.array(normals) if normals else np.zeros((0, dim))


def _nullspace(M, tol=1e-9):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] == 0:
        return np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


@dataclass(frozen=True)
class PolyhedralCone:
    """cone(generators) = {x : normals @ x >= 0}, both descriptions kept."""

    generators: np.ndarray
    normals: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generators", np.atleast_2d(np.asarray(self.generators, dtype=float)))
        object.__setattr__(self, "normals", np.atleast_2d(np.asarray(self.normals, dtype=float)))

    @property
    def dim(self) -> int:
        return self.generators.shape[1] if self.generators.size else self.normals.shape[1]

    @staticmethod
    def from_generators(G) -> "PolyhedralCone":
        G = np.atleast_2d(np.asarray(G, dtype=float))
        N = _facets_from_generators(list(G), G.shape[1])
        cone = PolyhedralCone(G, N)
        cone.check_consistency()
        return cone

    @staticmethod
    def from_normals(N) -> "PolyhedralCone":
        N = np.atleast_2d(np.asarray(N, dtype=float))
        dim = N.shape[1]
        # generators of {Nx >= 0} are the facet normals of cone(rows N)
        G = _facets_from_generators(list(N), dim)
        cone = PolyhedralCone(G, N)
        cone.check_consistency()
        return cone

    def check_consistency(self, samples: int = 64, tol: float = 1e-8):
        """LP cross-check of the two descriptions (low dimension only)."""
        G, N = self.generators, self.normals
        if G.size and N.size and np.any(G @ N.T < -tol):
            raise InconsistentConeDescription("a generator violates a half-space")
        rng = np.random.default_rng(7)
        dim = self.dim
        for _ in range(samples):
            x = rng.standard_normal(dim)
            in_h = (not N.size) or bool(np.all(N @ x >= -tol))
            in_v = self._in_generated(x, tol)
            if in_h != in_v:
                raise InconsistentConeDescription(f"descriptions disagree at {x}")

    def _in_generated(self, x, tol: float = 1e-8) -> bool:
        G = self.generators
        if not G.size:
            return bool(np.linalg.norm(x) <= tol)
        res = linprog(np.zeros(G.shape[0]), A_eq=G.T, b_eq=x,
                      bounds=[(0, None)] * G.shape[0], method="highs")
        if res.status == 0:
            return True
        # allow tiny infeasibility from rounding
        c2 = np.concatenate([np.zeros(G.shape[0]), np.ones(2 * self.dim)])
        res2 = linprog(c2,
                       A_eq=np.hstack([G.T, np.eye(self.dim), -np.eye(self.dim)]),
                       b_eq=x,
                       bounds=[(0, None)] * (G.shape[0] + 2 * self.dim),
                       method="highs")
        return bool(res2.status == 0 and res2.fun <= tol)

    def contains(self, x, tol: float = 1e-9) -> bool:
        if self.normals.size == 0:
            return True
        return bool(np.all(self.normals @ np.asarray(x, dtype=float) >= -tol))


# ---------------------------------------------------------------------------
# polar / antipode / properness
# ---------------------------------------------------------------------------

def polar(cone):
    """Polar cone {xi : <v, xi> >= 0 for all v in the cone}."""
    if isinstance(cone, RoundCone):
        return RoundCone(1.0 / cone.slope, cone.dimension, cone.orientation)
    return PolyhedralCone(cone.normals.copy(), cone.generators.copy())


def antipode(cone):
    if isinstance(cone, RoundCone):
        flip = "up" if cone.orientation == "down" else "down"
        return RoundCone(cone.slope, cone.dimension, flip)
    return PolyhedralCone(-cone.generators, -cone.normals)


def is_proper(cone) -> bool:
    """True iff the cone contains no line."""
    if isinstance(cone, RoundCone):
        return True
    G = cone.generators
    if not G.size or np.linalg.matrix_rank(G, tol=1e-9) == 0:
        return True
    dim = cone.dim
    # proper iff some functional is uniformly positive on the generators
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    rows = [g for g in G if np.linalg.norm(g) > 1e-12]
    A_ub = np.hstack([-np.array([g / np.linalg.norm(g) for g in rows]), np.ones((len(rows), 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(len(rows)),
                  bounds=[(-1, 1)] * dim + [(0, None)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


def interior_nonempty(cone) -> bool:
    if isinstance(cone, RoundCone):
        return True
    N = cone.normals
    if N.size == 0:
        return True
    dim = cone.dim
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-N, np.ones((N.shape[0], 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(N.shape[0]),
                  bounds=[(-1, 1)] * dim + [(0, None)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


# ---------------------------------------------------------------------------
# relative thickening  C<eps> = {xi : d(xi, C) < eps ||xi||}
# ---------------------------------------------------------------------------

def _distance_to(C, xi) -> float:
    xi = np.asarray(xi, dtype=float)
    if isinstance(C, RoundCone):
        return C.distance(xi)
    if isinstance(C, PolyhedralCone):
        return _distance_to_polyhedral(C, xi)
    kind = C[0]
    if kind == "ray":
        return _dist_point_ray(xi, np.asarray(C[1], dtype=float))
    if kind == "rays":
        return min(_dist_point_ray(xi, np.asarray(u, dtype=float)) for u in C[1])
    if kind == "round_boundary":
        return C[1].boundary_distance(xi)
    raise ValueError(f"unknown conic set {C!r}")


def _distance_to_polyhedral(C: PolyhedralCone, xi, tol=1e-9) -> float:
    if C.contains(xi):
        return 0.0
    G = [g for g in C.generators if np.linalg.norm(g) > 1e-12]
    best = float(np.linalg.norm(xi))  # projection onto the apex
    for k in range(1, len(G) + 1):
        for subset in itertools.combinations(G, k):
            M = np.array(subset).T
            coef, *_ = np.linalg.lstsq(M, xi, rcond=None)
            y = M @ coef
            if not C.contains(y, tol=1e-7):
                continue
            r = xi - y
            if all(float(r @ g) <= tol * np.linalg.norm(g) for g in G):
                best = min(best, float(np.linalg.norm(r)))
    return best


def thicken_contains(C, eps: float, xi) -> bool:
    """Membership in the relative thickening of a conic set."""
    xi = np.asarray(xi, dtype=float)
    n = float(np.linalg.norm(xi))
    if n == 0.0:
        raise ZeroCovector("the thickening is only defined away from zero")
    return _distance_to(C, xi) < eps * n


# ---------------------------------------------------------------------------
# fiberwise conic convex hulls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicSample:
    basepoint: np.ndarray
    rays: tuple

    def __post_init__(self):
        object.__setattr__(self, "basepoint", np.asarray(self.basepoint, dtype=float))
        rays = tuple(np.asarray(r, dtype=float) / np.linalg.norm(r) for r in self.rays)
        object.__setattr__(self, "rays", rays)


@dataclass(frozen=True)
class ConicHull:
    basepoint: np.ndarray
    cone: PolyhedralCone
    proper: bool


def conv_conic(sample: ConicSample) -> ConicHull:
    """Conic convex hull of the sampled rays in one fiber."""
    cone = PolyhedralCone.from_generators(np.array(sample.rays))
    return ConicHull(sample.basepoint, cone, is_proper(cone))


# ---------------------------------------------------------------------------
# regions of the cut-off construction (meridian-plane evaluation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZRegion:
    """Band between the two shifted cone boundaries, inside a cylinder.

    Membership: ||x'|| < r and -delta - c||x'|| < x_n <= delta + c||x'||.
    """

    c: float
    r: float
    delta: float

    def __post_init__(self):
        if min(self.c, self.r, self.delta) <= 0:
            raise InvalidRegionParameters("Z needs c, r, delta > 0")


@dataclass(frozen=True)
class URegion:
    """{ ||x'|| < r, -s < x_n < s - c||x'|| }."""

    c: float
    r: float
    s: float

    def __post_init__(self):
        if min(self.c, self.r, self.s) <= 0:
            raise InvalidRegionParameters("U needs c, r, s > 0")
        if not self.r < self.s / self.c:
            raise InvalidRegionParameters("U needs r < s/c")


@dataclass(frozen=True)
class BallRegion:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidRegionParameters("ball radius must be positive")


@dataclass(frozen=True)
class WRegion:
    """Points of Z from which the shifted cone arrangement stays admissible.

    The three defining conditions (corners avoided, crossing locus inside
    the cylinder, covector thickening inclusion along the crossing locus)
    are all rotationally symmetric and evaluated in the meridian plane.
    """

    c: float
    cprime: float
    r: float
    delta: float
    eps: float

    def __post_init__(self):
        if min(self.c, self.r, self.delta, self.eps) <= 0:
            raise InvalidRegionParameters("W needs positive parameters")
        if not self.cprime > self.c:
            raise InvalidRegionParameters("W needs c' > c")


def _z_contains_2d(reg: ZRegion, u: float, z: float) -> bool:
    return (abs(u) < reg.r
            and -reg.delta - reg.c * abs(u) < z <= reg.delta + reg.c * abs(u))


def _w_crossings(reg: WRegion, ux: float, zx: float):
    """Meridian intersection points of dZ^{inf,delta} with the shifted cones."""
    pts = []
    for top in (True, False):          # sheet of Z
        for upper in (True, False):    # sheet of the shifted cone pair
            for s1 in (1.0, -1.0):     # sign of u on the Z sheet
                for s2 in (1.0, -1.0):  # sign of (u - ux) on the shifted sheet
                    a1 = reg.c * s1 if top else -reg.c * s1
                    b1 = reg.delta if top else -reg.delta
                    a2 = reg.cprime * s2 if upper else -reg.cprime * s2
                    b2 = zx - a2 * ux
                    if a1 == a2:
                        continue
                    u = (b2 - b1) / (a1 - a2)
                    if s1 * u < -1e-12 or s2 * (u - ux) < -1e-12:
                        continue
                    z = a1 * u + b1
                    pts.append((u, z, top, upper))
    # dedupe
    out = []
    for p in pts:
        if not any(abs(p[0] - q[0]) < 1e-12 and abs(p[1] - q[1]) < 1e-12
                   and p[2] == q[2] and p[3] == q[3] for q in out):
            out.append(p)
    return out


def _w_margin_2d(reg: WRegion, ux: float, zx: float) -> float:
    """Positive iff (|x'|, x_n) = (ux, zx) lies in the W region.

    Returns the minimum slack over all strict conditions; the closed
    top-sheet inequality never binds for members because the crossing
    condition excludes sheet points.
    """
    ux = abs(ux)
    slacks = []
    # membership in Z
    slacks.append(reg.r - ux)
    slacks.append(zx - (-reg.delta - reg.c * ux))
    slacks.append(reg.delta + reg.c * ux - zx)   # closed side; slack 0 allowed
    if min(slacks[:2]) <= 0 or slacks[2] < 0:
        return -1.0
    # corners (0, +-delta) keep a positive distance from the closed double cone
    corner_slacks = [abs(reg.delta - zx) - reg.cprime * ux,
                     abs(-reg.delta - zx) - reg.cprime * ux]
    slacks += corner_slacks
    if min(corner_slacks) <= 0:
        return min(slacks)
    crossings = _w_crossings(reg, ux, zx)
    for (u, z, top, upper) in crossings:
        slacks.append(reg.r - abs(u))
        if abs(u) < 1e-13:
            return -1.0
        su = 1.0 if u > 0 else -1.0
        # conormal ray of the Z sheet at the crossing
        zray = np.array([reg.c * su, -1.0]) if top else np.array([-reg.c * su, -1.0])
        # antipoded fiber of the shifted arrangement
        if abs(u - ux) < 1e-13:
            etas = [np.array([reg.cprime, -1.0]), np.array([-reg.cprime, -1.0])]
        else:
            sv = 1.0 if u - ux > 0 else -1.0
            if upper:
                etas = [np.array([reg.cprime * sv, -1.0])]
            else:
                etas = [np.array([-reg.cprime * sv, -1.0])]
        for eta in etas:
            d = _dist_point_ray(eta, zray)
            slacks.append(reg.eps * float(np.linalg.norm(eta)) - d)
    return min(slacks)


def region_contains(region, point) -> bool:
    """Exact membership for the cut-off regions."""
    x = np.asarray(point, dtype=float)
    if isinstance(region, BallRegion):
        return bool(np.linalg.norm(x - np.asarray(region.center, dtype=float)) < region.radius)
    u, z = float(np.linalg.norm(x[:-1])), float(x[-1])
    if isinstance(region, ZRegion):
        return _z_contains_2d(region, u, z)
    if isinstance(region, URegion):
        return u < region.r and -region.s < z < region.s - region.c * u
    if isinstance(region, WRegion):
        return _w_margin_2d(region, u, z) > 0
    raise InvalidRegionParameters(f"unknown region {region!r}")


def w_region_margin(region: WRegion, point) -> float:
    x = np.asarray(point, dtype=float)
    return _w_margin_2d(region, float(np.linalg.norm(x[:-1])), float(x[-1]))


# ---------------------------------------------------------------------------
# boundary conormal arrangement of a shifted cone pair
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicArrangement:
    """Conormal data along the boundaries of x + cone and x + (-cone).

    Supports membership tests for pairs (y; eta): y on one of the two
    boundary cones through x and eta on the matched outward ray of the
    polar boundary, or the whole polar boundary over the apex.
    """

    x: np.ndarray
    cone: RoundCone

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.cone.orientation != "down":
            raise ValueError("arrangement is set up for the down cone")

    def contains(self, y, eta, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        if np.linalg.norm(eta) <= tol:
            return False
        w = y - self.x
        rho, z = float(np.linalg.norm(w[:-1])), float(w[-1])
        c = self.cone.slope
        if rho <= tol and abs(z) <= tol:
            # apex: the fiber is the whole boundary of the up polar cone
            nr = float(np.linalg.norm(eta[:-1]))
            return abs(eta[-1] - nr / c) <= tol * max(1.0, float(np.linalg.norm(eta)))
        rays = []
        if abs(z + c * rho) <= tol * max(1.0, rho):      # on d(x + cone)
            rays.append(self._ray(w, rho, +1.0))
        if abs(z - c * rho) <= tol * max(1.0, rho):      # on d(x + antipode)
            rays.append(self._ray(w, rho, -1.0))
        if not rays:
            return False
        u = eta / np.linalg.norm(eta)
        return any(float(np.linalg.norm(u - r)) <= 1e-7 for r in rays)

    def _ray(self, w, rho, sheet_sign):
        c = self.cone.slope
        n = len(w)
        d = np.zeros(n)
        if rho > 0:
            d[:-1] = sheet_sign * c * (w[:-1] / rho)
        d[-1] = 1.0
        return d / np.linalg.norm(d)


def s_gamma_x(x, cone: RoundCone) -> ConicArrangement:
    return ConicArrangement(np.asarray(x, dtype=float), cone)


# ---------------------------------------------------------------------------
# the cut-off parameter chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffParams:
    c: float
    eps: float


def cutoff_params(c1: float, c2: float) -> CutoffParams:
    """Slope and thickening width separating the two polar boundaries.

    The slope is chosen so its polar boundary angle is the midpoint of
    the two target angles; the width is half the angular margin, taken
    as a chordal distance.  Always solvable for c2 > c1 > 0.
    """
    if not 0 < c1 < c2:
        raise ValueError("need c2 > c1 > 0")
    a1, a2 = math.atan(c1), math.atan(c2)
    mid = 0.5 * (a1 + a2)
    margin = 0.5 * (a2 - a1)
    return CutoffParams(c=math.tan(mid), eps=0.5 * math.sin(margin))


def verify_cutoff_inclusion(c1: float, c2: float, c: float, eps: float,
                            n_angles: int = 10_001) -> bool:
    """Sampled check that the thickened polar boundary of gamma_c stays
    between the polar cones of gamma_c1 and gamma_c2."""
    a1, a2 = math.atan(c1), math.atan(c2)
    ac = math.atan(c)
    ray = np.array([math.sin(ac), -math.cos(ac)])
    thetas = np.linspace(0.0, math.pi, n_angles)
    for th in thetas:
        xi = np.array([math.sin(th), -math.cos(th)])
        if _dist_point_ray(xi, ray) < eps:
            if not (a1 - 1e-12 <= th <= a2 + 1e-12):
                return False
    return True


def split_radius(c1: float, c2: float, r: float,
                 rel_tol: float = 1e-6, n_radial: int = 12, n_angular: int = 48) -> float:
    """Largest ball around the origin that fits inside the W region.

    Built from the cut-off parameters with c' = c + eps/2 and
    delta = eps r / 4; the radius is found by bisection against sampled
    half-disc membership in the meridian plane.
    """
    if not (0 < c1 < c2 and r > 0):
        raise ValueError("need c2 > c1 > 0 and r > 0")
    cp = cutoff_params(c1, c2)
    reg = WRegion(cp.c, cp.c + cp.eps / 2, r, cp.eps * r / 4, cp.eps)

    ts = np.linspace(-math.pi / 2, math.pi / 2, n_angular)
    frs = np.linspace(0.0, 1.0, n_radial + 1)[1:]

    def ball_inside(rho: float) -> bool:
        for fr in frs:
            for t in ts:
                u = fr * rho * math.cos(t)
                z = fr * rho * math.sin(t)
                if _w_margin_2d(reg, u, z) <= 0:
                    return False
        return True

    if _w_margin_2d(reg, 0.0, 0.0) <= 0:
        raise InvalidRegionParameters("origin not in the W region; parameter chain broken")
    lo, hi = 0.0, r
    if ball_inside(hi):
        return hi
    while hi - lo > rel_tol * max(hi, 1e-30):
        mid = 0.5 * (lo + hi)
        if ball_inside(mid):
            lo = mid
        else:
            hi = mid
    return lo


def cutoff_region(c1: float, c2: float, r: float) -> WRegion:
    cp = cutoff_params(c1, c2)
    return WRegion(cp.c, cp.c + cp.eps / 2, r, cp.eps * r / 4, cp.eps)


# ---------------------------------------------------------------------------
# the nested window ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowLadder:
    """Four nested product windows (ball x interval) on the vertical axis.

    The base intervals are the fixed fractions (-r1/8,-r1/16), (-r1/4,0),
    (-r1/2,r1/2), (-r1,r1); the product windows shrink them by the
    documented factors so successive closures nest.
    """

    r1: float
    c1: float
    rho: float
    centers: tuple
    radii: tuple
    ball_radii: tuple
    shrink: tuple

    def interval(self, i: int):
        t, tp, mu = self.centers[i], self.radii[i], self.shrink[i]
        return (t - tp * (1 - mu), t + tp * (1 - mu))

    def base_interval(self, i: int):
        return (self.centers[i] - self.radii[i], self.centers[i] + self.radii[i])

    def contains(self, i: int, point) -> bool:
        x = np.asarray(point, dtype=float)
        lo, hi = self.interval(i)
        return bool(np.linalg.norm(x[:-1]) < self.ball_radii[i] and lo < x[-1] < hi)

    def nesting_margins(self):
        out = []
        for i in range(3):
            lo_i, hi_i = self.interval(i)
            lo_j, hi_j = self.interval(i + 1)
            out.append(min(self.ball_radii[i + 1] - self.ball_radii[i],
                           lo_i - lo_j, hi_j - hi_i))
        return out


def window_ladder(r1: float, c1: float) -> WindowLadder:
    if r1 <= 0 or c1 <= 0:
        raise InvalidRegionParameters("need r1, c1 > 0")
    base = [(-r1 / 8, -r1 / 16), (-r1 / 4, 0.0), (-r1 / 2, r1 / 2), (-r1, r1)]
    centers = tuple((a + b) / 2 for a, b in base)
    radii = tuple((b - a) / 2 for a, b in base)
    rho = 0.5 * min(radii) / c1
    shrink = tuple((5 - i) / 100 for i in (1, 2, 3, 4))
    ball_radii = tuple(i * rho / 8 for i in (1, 2, 3, 4))
    ladder = WindowLadder(r1, c1, rho, centers, radii, ball_radii, shrink)
    if min(ladder.nesting_margins()) <= 0:
        raise InvalidRegionParameters("ladder construction failed to nest")
    return ladder


# ---------------------------------------------------------------------------
# polyhedron helpers shared with the convolution module
# ---------------------------------------------------------------------------

def vertices_of_polyhedron(A, b, tol=1e-9):
    """(vertices, recession rays) of {x : A x <= b}, brute force."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = A.shape[1]
    verts = []
    for subset in itertools.combinations(range(A.shape[0]), n):
        M = A[list(subset)]
        if abs(np.linalg.det(M)) < tol:
            continue
        x = np.linalg.solve(M, b[list(subset)])
        if np.all(A @ x <= b + 1e-7):
            verts.append(x)
    verts = _dedupe_rows(verts, tol=1e-7)
    if not verts:
        res = linprog(np.zeros(n), A_ub=A, b_ub=b,
                      bounds=[(None, None)] * n, method="highs")
        if res.status != 0:
            raise ValueError("empty polyhedron")
        verts = [np.asarray(res.x, dtype=float)]
    rec = PolyhedralCone.from_normals(-A)
    rays = [g for g in rec.generators if np.linalg.norm(g) > tol]
    return verts, rays


def hrep_from_vrep(points, rays, tol=1e-7):
    """Half-space description of conv(points) + cone(rays), brute force."""
    points = [np.asarray(p, dtype=float) for p in points]
    rays = [np.asarray(r, dtype=float) for r in rays]
    n = len(points[0])
    dirs = [q - points[0] for q in points[1:]] + rays
    dirs = [d for d in dirs if np.linalg.norm(d) > tol]
    cands = []
    if n == 1:
        cands = [np.array([1.0]), np.array([-1.0])]
    else:
        for subset in itertools.combinations(range(len(dirs)), n - 1):
            M = np.array([dirs[i] for i in subset])
            ns = _nullspace(M)
            if ns.shape[1] != 1:
                continue
            cands += [ns[:, 0], -ns[:, 0]]
        if not dirs:
            cands = [v for k in range(n) for v in (np.eye(n)[k], -np.eye(n)[k])]
    A_rows, b_rows = [], []
    for h in _dedupe_rows(_normalize_rows(cands)):
        if any(float(h @ r) > tol for r in rays):
            continue
        off = max(float(h @ p) for p in points)
        A_rows.append(h)
        b_rows.append(off)
    # drop non-touching duplicates in the same direction
    keep = []
    for i, h in enumerate(A_rows):
        dup = False
        for j in keep:
            if np.linalg.norm(A_rows[j] - h) < 1e-9 and b_rows[j] <= b_rows[i] + 1e-9:
                dup = True
                break
        if not dup:
            keep.append(i)
    return np.array([A_rows[i] for i in keep]), np.array([b_rows[i] for i in keep])
