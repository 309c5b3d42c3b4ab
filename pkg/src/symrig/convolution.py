"""Half-line convolution kernels on barcodes and on convex indicators.

The two kernel functors project the microsupport of a sheaf into one
closed half of the cotangent directions while changing nothing on the
interior of that half.  On the line they act bar by bar through the
closed-form tables below; the tables were derived with (and are tested
against) the cellular pushforward in symrig.cellular.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .barcode import Bar, Barcode, Endpoint
from .errors import DimensionMismatch, MixedDirectionBar


class HalfLineCone1D(Enum):
    """The two proper closed convex cones of the line with interior."""

    LEFT = "left"    # (-inf, 0]
    RIGHT = "right"  # [0, +inf)


def _shape(b: Bar) -> tuple[str, str]:
    l = "amb" if b.left.is_ambient else ("cl" if b.left.closed else "op")
    r = "amb" if b.right.is_ambient else ("cl" if b.right.closed else "op")
    return l, r


def _is_point_bar(b: Bar) -> bool:
    return (not b.left.is_ambient and not b.right.is_ambient
            and b.left.value == b.right.value)


# Output templates: None deletes the bar; otherwise
# (new left, new right, degree shift) where each end is "keep", "amb",
# "keep_as_closed_left", etc. encoded via small lambdas below.

def _mk(left_spec, right_spec, dshift):
    def apply(b: Bar) -> Bar:
        lv = None if b.left.is_ambient else b.left.value
        rv = None if b.right.is_ambient else b.right.value

        def end(spec, is_left):
            if spec == "amb":
                return Endpoint.neg() if is_left else Endpoint.pos()
            which, closed = spec  # ("l"|"r", bool)
            v = lv if which == "l" else rv
            return Endpoint.at(v, closed)

        return Bar(end(left_spec, True), end(right_spec, False), b.degree + dshift)
    return apply


# kernel = left half-line: microsupport pushed into the upward directions,
# outputs are left-closed / right-open / ambient-ended
_P_LEFT = {
    ("cl", "op"): _mk(("l", True), ("r", False), 0),
    ("cl", "cl"): _mk(("l", True), "amb", 0),
    ("op", "op"): _mk(("r", True), "amb", -1),
    ("op", "cl"): None,
    ("cl", "amb"): _mk(("l", True), "amb", 0),
    ("op", "amb"): None,
    ("amb", "op"): _mk("amb", ("r", False), 0),
    ("amb", "cl"): _mk("amb", "amb", 0),
    ("amb", "amb"): _mk("amb", "amb", 0),
}

_Q_LEFT = {
    ("cl", "op"): _mk(("l", True), ("r", False), 0),
    ("cl", "cl"): _mk("amb", ("l", False), 1),
    ("op", "op"): _mk("amb", ("r", False), 0),
    ("op", "cl"): None,
    ("cl", "amb"): _mk(("l", True), "amb", 0),
    ("op", "amb"): _mk("amb", "amb", 0),
    ("amb", "op"): _mk("amb", ("r", False), 0),
    ("amb", "cl"): None,
    ("amb", "amb"): _mk("amb", "amb", 0),
}

# point bars {a}: tensor kernel gives the closed ray to the right of a,
# hom kernel the open ray to the left, shifted
_P_LEFT_POINT = _mk(("l", True), "amb", 0)
_Q_LEFT_POINT = _mk("amb", ("l", False), 1)


def _mirror_bar(b: Bar) -> Bar:
    left = Endpoint.neg() if b.right.is_ambient else Endpoint.at(-b.right.value, b.right.closed)
    right = Endpoint.pos() if b.left.is_ambient else Endpoint.at(-b.left.value, b.left.closed)
    return Bar(left, right, b.degree)


def _mirror_barcode(bc: Barcode) -> Barcode:
    a, b = bc.ambient
    return Barcode((-b, -a), tuple(_mirror_bar(x) for x in bc.bars), bc.coefficients)


def _apply_table(bc: Barcode, table, point_rule) -> Barcode:
    out = []
    for b in bc.bars:
        rule = point_rule if _is_point_bar(b) else table[_shape(b)]
        if rule is not None:
            out.append(rule(b))
    return Barcode(bc.ambient, tuple(out), bc.coefficients)


def p_cutoff_bar(bc: Barcode, gamma: HalfLineCone1D) -> Barcode:
    """Tensor-kernel cut-off, bar by bar."""
    if gamma is HalfLineCone1D.LEFT:
        return _apply_table(bc, _P_LEFT, _P_LEFT_POINT)
    return _mirror_barcode(_apply_table(_mirror_barcode(bc), _P_LEFT, _P_LEFT_POINT))


def q_cutoff_bar(bc: Barcode, gamma: HalfLineCone1D) -> Barcode:
    """Hom-kernel cut-off, bar by bar."""
    if gamma is HalfLineCone1D.LEFT:
        return _apply_table(bc, _Q_LEFT, _Q_LEFT_POINT)
    return _mirror_barcode(_apply_table(_mirror_barcode(bc), _Q_LEFT, _Q_LEFT_POINT))


# cones of the comparison maps, per bar: P F -> F -> cone(u),
# F -> Q F -> cone(v).  Needed for the interior-isomorphism check.
_U_CONE_LEFT = {
    ("cl", "op"): [],
    ("cl", "cl"): [_mk(("r", False), "amb", 1)],
    ("op", "op"): [_mk(("l", False), "amb", 0)],
    ("op", "cl"): [_mk(("l", False), ("r", True), 0)],
    ("cl", "amb"): [],
    ("op", "amb"): [_mk(("l", False), "amb", 0)],
    ("amb", "op"): [],
    ("amb", "cl"): [_mk(("r", False), "amb", 1)],
    ("amb", "amb"): [],
}

_V_CONE_LEFT = {
    ("cl", "op"): [],
    ("cl", "cl"): [_mk("amb", ("r", True), 1)],
    ("op", "op"): [_mk("amb", ("l", True), 0)],
    ("op", "cl"): [_mk(("l", False), ("r", True), 1)],
    ("cl", "amb"): [],
    ("op", "amb"): [_mk("amb", ("l", True), 0)],
    ("amb", "op"): [],
    ("amb", "cl"): [_mk("amb", ("r", True), 1)],
    ("amb", "amb"): [],
}

_U_CONE_LEFT_POINT = [_mk(("l", False), "amb", 1)]
_V_CONE_LEFT_POINT = [_mk("amb", ("l", True), 1)]


def _cone_bars(bc: Barcode, table, point_rule) -> list:
    out = []
    for b in bc.bars:
        rules = point_rule if _is_point_bar(b) else table[_shape(b)]
        out.extend(rule(b) for rule in rules)
    return out


def _bar_in_cone_side(b: Bar, gamma: HalfLineCone1D, interior_only: bool) -> bool:
    """Does any conormal direction of the bar land in the polar side of gamma?

    For the left half-line the polar side is the upward half; its
    interior misses the zero covector, so only the sign flags matter.
    """
    flags = b.profile_flags()
    if gamma is HalfLineCone1D.LEFT:
        return any(plus for (_, plus, _) in flags)
    return any(minus for (_, _, minus) in flags)


@dataclass(frozen=True)
class ConeCheckReport:
    ok: bool
    output_in_polar_side: bool
    cone_has_no_interior_ss: bool
    output_rows: tuple
    cone_rows: tuple
    notes: tuple = ()


def cutoff_cone_check(obj, gamma) -> ConeCheckReport:
    """Verify the two kernel contracts on a barcode or a convex indicator.

    (a) the output microsupport sits in the closed polar side;
    (b) the cone of the comparison map has no microsupport in the open
    interior of that side, so the map is invertible there.
    """
    if isinstance(obj, ConvexIndicator):
        return _cone_check_convex(obj, gamma)
    bc: Barcode = obj
    if gamma is HalfLineCone1D.LEFT:
        out = p_cutoff_bar(bc, gamma)
        cone = _cone_bars(bc, _U_CONE_LEFT, _U_CONE_LEFT_POINT)
    else:
        mirrored = _mirror_barcode(bc)
        out = p_cutoff_bar(bc, gamma)
        cone = [_mirror_bar(b) for b in _cone_bars(mirrored, _U_CONE_LEFT, _U_CONE_LEFT_POINT)]
    side_ok = not any(_bar_in_cone_side(b, _opposite(gamma), False) for b in out.bars)
    cone_ok = not any(_bar_in_cone_side(b, gamma, True) for b in cone)
    return ConeCheckReport(
        ok=side_ok and cone_ok,
        output_in_polar_side=side_ok,
        cone_has_no_interior_ss=cone_ok,
        output_rows=tuple(map(tuple, out.to_json_rows())),
        cone_rows=tuple(map(tuple, Barcode(bc.ambient, tuple(cone), bc.coefficients).to_json_rows())),
    )


def _opposite(gamma: HalfLineCone1D) -> HalfLineCone1D:
    return HalfLineCone1D.RIGHT if gamma is HalfLineCone1D.LEFT else HalfLineCone1D.LEFT


# ---------------------------------------------------------------------------
# direction splitting on barcodes
# ---------------------------------------------------------------------------

def split_by_direction(bc: Barcode):
    """Split into (upward part, downward part, locally constant part).

    Bars with a closed finite right end or an open finite left end mix
    the two directions and obstruct the splitting.
    """
    plus, minus, const = [], [], []
    for b in bc.bars:
        if b.is_full:
            const.append(b)
            continue
        l, r = _shape(b)
        pure_plus = l in ("cl", "amb") and r in ("op", "amb")
        pure_minus = l in ("op", "amb") and r in ("cl", "amb")
        if pure_plus:
            plus.append(b)
        elif pure_minus:
            minus.append(b)
        else:
            raise MixedDirectionBar(f"bar {b} has conormal directions on both sides")
    mk = lambda bars: Barcode(bc.ambient, tuple(bars), bc.coefficients)
    return mk(plus), mk(minus), mk(const)


def min_mixed_bar_length(bc: Barcode) -> float:
    """Shortest bar carrying both conormal directions; inf if none."""
    best = float("inf")
    for b in bc.bars:
        if b.is_full or b.left.is_ambient or b.right.is_ambient:
            continue
        l, r = _shape(b)
        mixed = (l == "cl" and r == "cl") or (l == "op" and r == "op")
        if mixed:
            best = min(best, b.right.value - b.left.value)
    return best


# ---------------------------------------------------------------------------
# convex indicators in R^n
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexIndicator:
    """Closed convex polyhedron {x : A x <= b} with a degree shift."""

    normals: np.ndarray   # (m, n)
    offsets: np.ndarray   # (m,)
    degree: int = 0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise DimensionMismatch("normals and offsets disagree")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.normals @ x <= self.offsets + tol))


def cutoff_convex(B: ConvexIndicator, gamma) -> ConvexIndicator:
    """Tensor-kernel cut-off of a convex indicator: the sum with the
    opposite cone, returned in half-space description.

    gamma must be polyhedral (generator description); the sum is built
    from the vertex description at low dimension.
    """
    from .cones import PolyhedralCone, vertices_of_polyhedron, hrep_from_vrep

    if isinstance(gamma, HalfLineCone1D):
        gens = np.array([[-1.0]]) if gamma is HalfLineCone1D.LEFT else np.array([[1.0]])
        gamma = PolyhedralCone.from_generators(gens)
    if gamma.dim != B.dim:
        raise DimensionMismatch(f"cone dimension {gamma.dim} vs indicator {B.dim}")
    verts, rays = vertices_of_polyhedron(B.normals, B.offsets)
    rays_a = [-g for g in gamma.generators]
    A, b = hrep_from_vrep(verts, list(rays) + rays_a)
    return ConvexIndicator(A, b, B.degree)


def _cone_check_convex(B: ConvexIndicator, gamma) -> ConeCheckReport:
    from .cones import PolyhedralCone

    out = cutoff_convex(B, gamma)
    if isinstance(gamma, HalfLineCone1D):
        gens = np.array([[-1.0]]) if gamma is HalfLineCone1D.LEFT else np.array([[1.0]])
        gamma = PolyhedralCone.from_generators(gens)
    # the conormal rays of the output are the inward normals -a_i; they lie
    # in the opposite polar side iff <g, a_i> >= 0 for every generator g
    G = np.asarray(gamma.generators, dtype=float)
    ok = all(np.all(G @ n >= -1e-9) for n in out.normals)
    return ConeCheckReport(
        ok=ok,
        output_in_polar_side=ok,
        cone_has_no_interior_ss=True,
        output_rows=tuple(map(tuple, np.column_stack([out.normals, out.offsets]).tolist())),
        cone_rows=(),
        notes=("indicator cut-off is computed as a set-level sum; the comparison cone "
               "is supported on the removed boundary and carries no interior directions",),
    )
