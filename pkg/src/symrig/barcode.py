"""Constructible sheaves on an open interval, as zigzag data and barcodes.

A sheaf constructible with respect to finitely many critical points
s_1 < ... < s_k is stored as stalk dimensions on the k points and the
k+1 open strata between them, together with the generization maps from
each point stalk to the two neighbouring stratum stalks.  Over a field
every such object splits into interval summands ("bars"); the splitting
is computed from exact rank invariants over GF(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySequence, InvalidPresentation, MixedDirectionBar
from .exactla import nullspace_mod, rank_mod

NEG_INF = float("-inf")
POS_INF = float("inf")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in range(2, int(n**0.5) + 1):
        if n % q == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldConfig:
    """Coefficient field GF(p)."""

    characteristic: int = 2

    def __post_init__(self):
        if not _is_prime(self.characteristic):
            raise ValueError(f"characteristic {self.characteristic} is not prime")

    @property
    def p(self) -> int:
        return self.characteristic


# ---------------------------------------------------------------------------
# endpoints and bars
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Endpoint:
    """One end of a bar.

    kind is "neg_inf" / "pos_inf" for the ambient interval ends (which are
    always open, and may sit at a finite ambient bound) and "finite" for an
    end strictly inside the ambient interval, carrying a closedness flag.
    """

    kind: str
    value: float | None = None
    closed: bool | None = None

    def __post_init__(self):
        if self.kind == "finite":
            if self.value is None or self.closed is None or not math.isfinite(self.value):
                raise ValueError("finite endpoint needs a finite value and a closedness flag")
        elif self.kind in ("neg_inf", "pos_inf"):
            if self.value is not None or self.closed is not None:
                raise ValueError("ambient endpoint carries no value or closedness flag")
        else:
            raise ValueError(f"unknown endpoint kind {self.kind!r}")

    @staticmethod
    def neg() -> "Endpoint":
        return Endpoint("neg_inf")

    @staticmethod
    def pos() -> "Endpoint":
        return Endpoint("pos_inf")

    @staticmethod
    def at(value: float, closed: bool) -> "Endpoint":
        return Endpoint("finite", float(value), bool(closed))

    @property
    def is_ambient(self) -> bool:
        return self.kind != "finite"

    def left_key(self):
        # closed left ends start earlier than open ones at the same value
        if self.kind == "neg_inf":
            return (NEG_INF, 0)
        if self.kind == "pos_inf":
            raise ValueError("pos_inf cannot be a left endpoint")
        return (self.value, 0 if self.closed else 1)

    def right_key(self):
        # open right ends stop earlier than closed ones at the same value
        if self.kind == "pos_inf":
            return (POS_INF, 0)
        if self.kind == "neg_inf":
            raise ValueError("neg_inf cannot be a right endpoint")
        return (self.value, 1 if self.closed else 0)


@dataclass(frozen=True)
class Bar:
    """Interval summand with a cohomological shift."""

    left: Endpoint
    right: Endpoint
    degree: int = 0

    def __post_init__(self):
        if not self.left.left_key() < self.right.right_key():
            raise ValueError(f"empty bar {self}")

    def sort_key(self):
        return (self.left.left_key(), self.right.right_key(), self.degree)

    def shifted(self, d: int) -> "Bar":
        return Bar(self.left, self.right, self.degree + d)

    @property
    def is_full(self) -> bool:
        return self.left.is_ambient and self.right.is_ambient

    @property
    def is_bounded(self) -> bool:
        return not (self.left.is_ambient or self.right.is_ambient)

    def in_positive_class(self) -> bool:
        """Finite left end closed and finite right end open."""
        ok_left = self.left.is_ambient or self.left.closed
        ok_right = self.right.is_ambient or not self.right.closed
        return bool(ok_left and ok_right)

    def profile_flags(self):
        """(point, plus, minus) contributions of this bar at its finite ends."""
        out = []
        if not self.left.is_ambient:
            out.append((self.left.value, bool(self.left.closed), not self.left.closed))
        if not self.right.is_ambient:
            out.append((self.right.value, not self.right.closed, bool(self.right.closed)))
        return out


def bar(left, right, degree: int = 0, left_closed: bool = True, right_closed: bool = False) -> Bar:
    """Shorthand: None means the ambient end."""
    l = Endpoint.neg() if left is None else Endpoint.at(left, left_closed)
    r = Endpoint.pos() if right is None else Endpoint.at(right, right_closed)
    return Bar(l, r, degree)


@dataclass(frozen=True)
class Barcode:
    ambient: tuple[float, float] = (NEG_INF, POS_INF)
    bars: tuple[Bar, ...] = ()
    coefficients: FieldConfig = field(default_factory=FieldConfig)

    def __post_init__(self):
        a, b = self.ambient
        if not a < b:
            raise ValueError("ambient interval must be nonempty")
        for br in self.bars:
            for e, side in ((br.left, "left"), (br.right, "right")):
                if not e.is_ambient and not a < e.value < b:
                    raise ValueError(f"{side} endpoint {e.value} outside ambient {self.ambient}")
        object.__setattr__(self, "bars", tuple(sorted(self.bars, key=Bar.sort_key)))

    def __len__(self):
        return len(self.bars)

    def critical_values(self):
        vals = set()
        for br in self.bars:
            for e in (br.left, br.right):
                if not e.is_ambient:
                    vals.add(e.value)
        return sorted(vals)

    def to_json_rows(self):
        """Rows [left, leftClosed, right, rightClosed, degree]; ambient ends are null."""
        rows = []
        for br in self.bars:
            l = None if br.left.is_ambient else br.left.value
            lc = False if br.left.is_ambient else bool(br.left.closed)
            r = None if br.right.is_ambient else br.right.value
            rc = False if br.right.is_ambient else bool(br.right.closed)
            rows.append([l, lc, r, rc, br.degree])
        return rows


@dataclass(frozen=True)
class MicrosupportProfile1D:
    """Conormal directions over the critical points: (point, plus, minus)."""

    entries: tuple[tuple[float, bool, bool], ...] = ()

    def __post_init__(self):
        for (_, plus, minus) in self.entries:
            if not (plus or minus):
                raise ValueError("profile entries must carry at least one direction")
        object.__setattr__(self, "entries", tuple(sorted(self.entries)))

    def points(self, direction=None):
        if direction == "plus":
            return sorted(pt for pt, pl, _ in self.entries if pl)
        if direction == "minus":
            return sorted(pt for pt, _, mi in self.entries if mi)
        return sorted(pt for pt, _, _ in self.entries)


# ---------------------------------------------------------------------------
# zigzag presentations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZigzagPresentation:
    """Stalks on k points and k+1 strata with generization maps.

    lambdas[i] : point stalk i -> stratum stalk i   (to the left)
    rhos[i]    : point stalk i -> stratum stalk i+1 (to the right)
    """

    critical_points: tuple[float, ...]
    point_dims: tuple[int, ...]
    stratum_dims: tuple[int, ...]
    lambdas: tuple[np.ndarray, ...]
    rhos: tuple[np.ndarray, ...]
    coefficients: FieldConfig = field(default_factory=FieldConfig)
    ambient: tuple[float, float] = (NEG_INF, POS_INF)

    def validate(self):
        k = len(self.critical_points)
        a, b = self.ambient
        if list(self.critical_points) != sorted(set(self.critical_points)):
            raise InvalidPresentation("critical points must be strictly increasing")
        if any(not a < s < b for s in self.critical_points):
            raise InvalidPresentation("critical points must lie inside the ambient interval")
        if len(self.point_dims) != k or len(self.stratum_dims) != k + 1:
            raise InvalidPresentation("stalk dimension counts do not match the critical set")
        if len(self.lambdas) != k or len(self.rhos) != k:
            raise InvalidPresentation("need one lambda and one rho per critical point")
        for i in range(k):
            lam = np.asarray(self.lambdas[i])
            rho = np.asarray(self.rhos[i])
            if lam.shape != (self.stratum_dims[i], self.point_dims[i]):
                raise InvalidPresentation(f"lambda[{i}] has shape {lam.shape}")
            if rho.shape != (self.stratum_dims[i + 1], self.point_dims[i]):
                raise InvalidPresentation(f"rho[{i}] has shape {rho.shape}")
        return self

    # vertex line: stratum 0, point 1, stratum 1, ..., point k, stratum k
    @property
    def n_vertices(self) -> int:
        return 2 * len(self.critical_points) + 1

    def vertex_dim(self, v: int) -> int:
        return self.stratum_dims[v // 2] if v % 2 == 0 else self.point_dims[(v - 1) // 2]

    def arrows(self):
        """(src_vertex, tgt_vertex, matrix) triples; sources are the points."""
        out = []
        for i in range(len(self.critical_points)):
            pv = 2 * i + 1
            out.append((pv, pv - 1, np.asarray(self.lambdas[i], dtype=np.int64)))
            out.append((pv, pv + 1, np.asarray(self.rhos[i], dtype=np.int64)))
        return out


def _matrix(rows, cols, fill=0):
    return np.full((rows, cols), fill, dtype=np.int64)


def presentation_of_barcode(bc: Barcode, critical_points=None) -> ZigzagPresentation:
    """Re-present a degree-0 barcode as zigzag data (block sum of intervals)."""
    if any(br.degree != 0 for br in bc.bars):
        raise InvalidPresentation("only degree-0 barcodes have a single-sheaf presentation")
    crits = list(critical_points) if critical_points is not None else bc.critical_values()
    k = len(crits)
    a, b = bc.ambient

    def point_in(brr: Bar, s: float) -> bool:
        lk = brr.left.left_key()
        rk = brr.right.right_key()
        return lk <= (s, 0) and (s, 1) <= rk

    def stratum_in(brr: Bar, i: int) -> bool:
        lo = a if i == 0 else crits[i - 1]
        hi = b if i == k else crits[i]
        mid_lo = (lo, 1)
        mid_hi = (hi, 0)
        return brr.left.left_key() <= mid_lo and mid_hi <= brr.right.right_key()

    supp_pt = [[point_in(brr, s) for brr in bc.bars] for s in crits]
    supp_st = [[stratum_in(brr, i) for brr in bc.bars] for i in range(k + 1)]
    point_dims = tuple(sum(row) for row in supp_pt)
    stratum_dims = tuple(sum(row) for row in supp_st)

    lambdas, rhos = [], []
    for i in range(k):
        lam = _matrix(stratum_dims[i], point_dims[i])
        rho = _matrix(stratum_dims[i + 1], point_dims[i])
        for j, brr in enumerate(bc.bars):
            if not supp_pt[i][j]:
                continue
            col = sum(supp_pt[i][:j])
            if supp_st[i][j]:
                lam[sum(supp_st[i][:j]), col] = 1
            if supp_st[i + 1][j]:
                rho[sum(supp_st[i + 1][:j]), col] = 1
        lambdas.append(lam)
        rhos.append(rho)
    return ZigzagPresentation(
        tuple(crits), point_dims, stratum_dims, tuple(lambdas), tuple(rhos),
        bc.coefficients, bc.ambient,
    ).validate()


# ---------------------------------------------------------------------------
# rank invariants and decomposition
# ---------------------------------------------------------------------------

def generalized_rank(pres: ZigzagPresentation, v: int, w: int) -> int:
    """Rank of the limit-to-colimit map of the zigzag restricted to [v, w].

    For a direct sum of interval modules this counts the intervals
    containing the whole segment, which pins the isomorphism class.
    """
    p = pres.coefficients.p
    verts = list(range(v, w + 1))
    dims = [pres.vertex_dim(u) for u in verts]
    total = sum(dims)
    if 0 in dims:
        # the diagram is connected, so the limit-to-colimit map factors
        # through any vertex; a zero stalk kills it
        return 0
    offs = np.cumsum([0] + dims)
    inside = [(s, t, A) for (s, t, A) in pres.arrows() if v <= s <= w and v <= t <= w]

    # limit: kernel of (x_t - A x_s) over the interior arrows
    crows = sum(A.shape[0] for (_, _, A) in inside)
    C = _matrix(crows, total)
    r0 = 0
    for (s, t, A) in inside:
        si, ti = verts.index(s), verts.index(t)
        rr = A.shape[0]
        C[r0:r0 + rr, offs[si]:offs[si + 1]] = (-A) % p
        C[r0:r0 + rr, offs[ti]:offs[ti + 1]] += np.eye(rr, dtype=np.int64)
        r0 += rr
    K = nullspace_mod(C % p, p) if crows else np.eye(total, dtype=np.int64)

    # colimit: cokernel of iota_s(y) - iota_t(A y) over the interior arrows
    dcols = sum(A.shape[1] for (_, _, A) in inside)
    D = _matrix(total, dcols)
    c0 = 0
    for (s, t, A) in inside:
        si, ti = verts.index(s), verts.index(t)
        cc = A.shape[1]
        D[offs[si]:offs[si + 1], c0:c0 + cc] += np.eye(cc, dtype=np.int64)
        D[offs[ti]:offs[ti + 1], c0:c0 + cc] = (-A) % p
        c0 += cc

    # image of the limit inside the colimit: include at the leftmost vertex
    head = _matrix(total, K.shape[1])
    head[offs[0]:offs[1], :] = K[offs[0]:offs[1], :]
    rank_D = rank_mod(D, p)
    return rank_mod(np.concatenate([head % p, D % p], axis=1), p) - rank_D


def all_generalized_ranks(pres: ZigzagPresentation):
    m = pres.n_vertices
    return {(v, w): generalized_rank(pres, v, w) for v in range(m) for w in range(v, m)}


def _interval_to_bar(pres: ZigzagPresentation, v: int, w: int) -> Bar:
    crits = pres.critical_points
    k = len(crits)
    a, b = pres.ambient
    if v % 2 == 0:
        i = v // 2
        left = Endpoint.neg() if i == 0 else Endpoint.at(crits[i - 1], closed=False)
    else:
        left = Endpoint.at(crits[(v - 1) // 2], closed=True)
    if w % 2 == 0:
        i = w // 2
        right = Endpoint.pos() if i == k else Endpoint.at(crits[i], closed=False)
    else:
        right = Endpoint.at(crits[(w - 1) // 2], closed=True)
    return Bar(left, right, 0)


def decompose(pres: ZigzagPresentation) -> Barcode:
    """Split a presentation into its interval summands.

    Multiplicities come from inclusion-exclusion over the segment ranks;
    the output is canonically sorted.
    """
    pres.validate()
    m = pres.n_vertices
    gr = all_generalized_ranks(pres)

    def g(v, w):
        return gr.get((v, w), 0) if 0 <= v and w < m and v <= w else 0

    bars = []
    for v in range(m):
        for w in range(v, m):
            mu = g(v, w) - g(v - 1, w) - g(v, w + 1) + g(v - 1, w + 1)
            if mu < 0:
                raise InvalidPresentation("rank invariants are not interval-consistent")
            bars.extend([_interval_to_bar(pres, v, w)] * mu)

    # dimension bookkeeping must come out exact
    check = [0] * m
    for br in bars:
        pr = presentation_of_barcode(
            Barcode(pres.ambient, (br,), pres.coefficients), list(pres.critical_points))
        for u in range(m):
            check[u] += pr.vertex_dim(u)
    if check != [pres.vertex_dim(u) for u in range(m)]:
        raise InvalidPresentation("decomposition does not account for all stalk dimensions")
    return Barcode(pres.ambient, tuple(bars), pres.coefficients)


def microsupport_profile(pres: ZigzagPresentation) -> MicrosupportProfile1D:
    """Flag each critical point whose generization maps fail to be bijective.

    The upward direction at s records failure on the left map, the
    downward direction failure on the right map; local systems produce
    an empty profile.
    """
    pres.validate()
    p = pres.coefficients.p
    entries = []
    for i, s in enumerate(pres.critical_points):
        lam, rho = pres.lambdas[i], pres.rhos[i]
        d = pres.point_dims[i]
        plus = not (lam.shape[0] == d and rank_mod(lam, p) == d)
        minus = not (rho.shape[0] == d and rank_mod(rho, p) == d)
        if plus or minus:
            entries.append((s, plus, minus))
    return MicrosupportProfile1D(tuple(entries))


# ---------------------------------------------------------------------------
# invariants of the positive class
# ---------------------------------------------------------------------------

def _require_positive_class(bc: Barcode):
    for br in bc.bars:
        if br.is_full:
            continue
        if not br.in_positive_class():
            raise MixedDirectionBar(f"bar {br} leaves the positive class")


def s_infty(bc: Barcode) -> set:
    """Finite endpoints of the bars with exactly one ambient end."""
    _require_positive_class(bc)
    out = set()
    for br in bc.bars:
        if br.is_full:
            continue
        if br.left.is_ambient:
            out.add(br.right.value)
        elif br.right.is_ambient:
            out.add(br.left.value)
    return out


def bounded_bars(bc: Barcode):
    """Multiset of (left, right, degree) over the bars with two finite ends."""
    _require_positive_class(bc)
    return sorted(
        (br.left.value, br.right.value, br.degree) for br in bc.bars if br.is_bounded
    )


# ---------------------------------------------------------------------------
# sections over open subintervals
# ---------------------------------------------------------------------------

def _end_status(bc_bar: Bar, u0: float, u1: float):
    """Classify both ends of bar ∩ (u0,u1): 'reach', 'closed', 'open', or None."""
    lk = bc_bar.left.left_key()
    rk = bc_bar.right.right_key()
    # clip to the window
    lk = max(lk, (u0, 1))
    rk = min(rk, (u1, 0))
    if not lk < rk:
        return None  # empty
    lstat = "reach" if lk == (u0, 1) else ("closed" if lk[1] == 0 else "open")
    rstat = "reach" if rk == (u1, 0) else ("closed" if rk[1] == 1 else "open")
    return lstat, rstat


_SECTION_TABLE = {
    # (left status, right status) -> cohomological degree of the 1-dim
    # contribution of the underlying sheaf, or None
    ("reach", "reach"): 0,
    ("closed", "reach"): 0,
    ("reach", "closed"): 0,
    ("closed", "closed"): 0,
    ("open", "open"): 1,
    ("closed", "open"): None,
    ("open", "closed"): None,
    ("reach", "open"): None,
    ("open", "reach"): None,
}


def global_sections(bc: Barcode, window) -> dict:
    """Graded dimensions of the sections over an open subinterval.

    Each bar contributes through the ten-case table keyed by how its
    clipped ends sit inside the window; the table is frozen from the
    cellular cochain computation on a stratification of the window.
    """
    u0, u1 = window
    a, b = bc.ambient
    u0, u1 = max(u0, a), min(u1, b)
    out: dict[int, int] = {}
    if not u0 < u1:
        return out
    for br in bc.bars:
        st = _end_status(br, u0, u1)
        if st is None:
            continue
        j = _SECTION_TABLE[st]
        if j is None:
            continue
        deg = j - br.degree
        out[deg] = out.get(deg, 0) + 1
    return {d: n for d, n in out.items() if n}


def restrict(bc: Barcode, window) -> Barcode:
    """Restriction of the barcode to an open subinterval (new ambient)."""
    u0, u1 = window
    a, b = bc.ambient
    u0, u1 = max(u0, a), min(u1, b)
    if not u0 < u1:
        raise ValueError("empty restriction window")
    bars = []
    for br in bc.bars:
        lk = max(br.left.left_key(), (u0, 1))
        rk = min(br.right.right_key(), (u1, 0))
        if not lk < rk:
            continue
        left = Endpoint.neg() if lk == (u0, 1) else Endpoint.at(lk[0], closed=(lk[1] == 0))
        right = Endpoint.pos() if rk == (u1, 0) else Endpoint.at(rk[0], closed=(rk[1] == 1))
        bars.append(Bar(left, right, br.degree))
    return Barcode((u0, u1), tuple(bars), bc.coefficients)


# ---------------------------------------------------------------------------
# limit operations on microsupport data
# ---------------------------------------------------------------------------

def limsup_microsupport(profiles, tol: float = 1e-9) -> MicrosupportProfile1D:
    """Accumulation set of a sequence of finite profiles.

    Flagged points from the whole sequence are merged by single-linkage
    clustering at the given tolerance; each cluster survives with the
    union of its direction flags and is represented by its minimum.
    Deterministic given the tolerance.
    """
    profiles = list(profiles)
    if not profiles:
        raise EmptySequence("limsup of an empty profile sequence")
    tagged = []  # (value, plus, minus)
    for prof in profiles:
        for (pt, plus, minus) in prof.entries:
            tagged.append((pt, plus, minus))
    if not tagged:
        return MicrosupportProfile1D(())
    tagged.sort()
    clusters = []
    cur = [tagged[0]]
    for item in tagged[1:]:
        if item[0] - cur[-1][0] <= tol:
            cur.append(item)
        else:
            clusters.append(cur)
            cur = [item]
    clusters.append(cur)
    entries = []
    for cl in clusters:
        rep = cl[0][0]
        plus = any(c[1] for c in cl)
        minus = any(c[2] for c in cl)
        entries.append((rep, plus, minus))
    return MicrosupportProfile1D(tuple(entries))


@dataclass(frozen=True)
class ConvexFiberFlags:
    plus: bool
    minus: bool
    proper: bool


def conv_fiber(flags) -> ConvexFiberFlags:
    """Fiberwise convex hull of the up/down rays; opposite rays span a line."""
    plus, minus = flags
    return ConvexFiberFlags(bool(plus), bool(minus), proper=not (plus and minus))
