"""Cellular cochain computations on stratified lines and planes.

Sections of a constructible sheaf over an open union of cells are
computed as the derived limit over the face poset, using the bar
cochain complex on strict chains

    C^q = prod over (c_0 < ... < c_q) of F(c_q),

which for arrangement stratifications agrees with sheaf cohomology.
The same machinery evaluates the convolution kernels on single bars
(pushforward along the second projection of the plane), which is the
brute-force oracle the closed-form bar tables are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barcode import (
    Bar,
    Barcode,
    Endpoint,
    FieldConfig,
    ZigzagPresentation,
    decompose,
)
from .exactla import nullspace_mod, rank_mod, row_echelon_mod, solve_mod

NEG_INF = float("-inf")
POS_INF = float("inf")


# ---------------------------------------------------------------------------
# cochain complexes over GF(p) with induced maps on cohomology
# ---------------------------------------------------------------------------

@dataclass
class CochainComplex:
    dims: list          # dims[i] = rank of C^i
    d: list             # d[i]: C^i -> C^{i+1}, matrix of shape (dims[i+1], dims[i])
    p: int

    def degree_count(self):
        return len(self.dims)


def _identity(n):
    return np.eye(n, dtype=np.int64)


def cohomology_reps(cx: CochainComplex):
    """Per degree: (reps, zin, split) with reps the chosen cocycle lifts.

    zin = [reps | boundaries] is kept so that cocycles can be reduced to
    cohomology coordinates by solving a linear system.
    """
    out = []
    for i in range(cx.degree_count()):
        n = cx.dims[i]
        if i < len(cx.d) and cx.d[i].size:
            Z = nullspace_mod(cx.d[i], cx.p)
        elif i < len(cx.d) and cx.dims[i + 1] == 0 or i >= len(cx.d):
            Z = _identity(n)
        else:
            Z = nullspace_mod(cx.d[i], cx.p) if i < len(cx.d) else _identity(n)
        if i == 0 or not cx.d[i - 1].size:
            B = np.zeros((n, 0), dtype=np.int64)
        else:
            B = cx.d[i - 1] % cx.p
        # pick cocycle columns independent modulo the boundaries
        stacked = np.concatenate([B, Z], axis=1) if Z.size or B.size else np.zeros((n, 0), dtype=np.int64)
        if stacked.shape[1]:
            _, piv = row_echelon_mod(stacked, cx.p)
        else:
            piv = []
        nb = B.shape[1]
        reps = Z[:, [j - nb for j in piv if j >= nb]] if Z.size else np.zeros((n, 0), dtype=np.int64)
        zin = np.concatenate([reps, B], axis=1)
        out.append({"reps": reps, "zin": zin, "h": reps.shape[1]})
    return out


def induced_on_cohomology(data_a, data_b, chain_map, degree, p):
    """Matrix of H^degree(f) given chain map matrices f[i]: A^i -> B^i."""
    ra = data_a[degree]["reps"]
    if ra.shape[1] == 0:
        return np.zeros((data_b[degree]["h"], 0), dtype=np.int64)
    img = (chain_map[degree] @ ra) % p
    zin = data_b[degree]["zin"]
    sol = solve_mod(zin, img, p)
    if sol is None:
        raise RuntimeError("image of a cocycle is not a cocycle modulo boundaries")
    return sol[: data_b[degree]["h"], :] % p


# ---------------------------------------------------------------------------
# face posets of line/plane arrangements
# ---------------------------------------------------------------------------

@dataclass
class CellSheaf:
    """Indicator-style constructible sheaf on a finite face poset.

    less holds all strict comparable pairs (i, j) with cell i in the
    closure of cell j; generization maps are scalars here (0 or 1).
    """

    n: int
    cell_dim: list
    less: set
    stalk: list          # 0/1 per cell
    p: int = 2

    def gen(self, i, j):
        return 1 if (self.stalk[i] and self.stalk[j]) else 0

    def rgamma(self, cells):
        """Bar complex of the derived limit over an open union of cells.

        Returns (complex, chains) where chains[q] lists the strict
        q-chains used to index C^q.
        """
        cells = [c for c in cells if True]
        cset = set(cells)
        c0 = [c for c in cells if self.stalk[c]]
        pairs = [(a, b) for a in cells for b in cells
                 if (a, b) in self.less and self.stalk[b]]
        triples = [(a, b, c) for (a, b) in [(x, y) for x in cells for y in cells if (x, y) in self.less]
                   for c in cells if (b, c) in self.less and self.stalk[c]]
        idx0 = {c: k for k, c in enumerate(c0)}
        idx1 = {pr: k for k, pr in enumerate(pairs)}
        d0 = np.zeros((len(pairs), len(c0)), dtype=np.int64)
        for k, (a, b) in enumerate(pairs):
            # (df)(a<b) = f(b) - gen(f(a))
            if b in idx0:
                d0[k, idx0[b]] += 1
            if a in idx0 and self.gen(a, b):
                d0[k, idx0[a]] -= 1
        d1 = np.zeros((len(triples), len(pairs)), dtype=np.int64)
        for k, (a, b, c) in enumerate(triples):
            # (df)(a<b<c) = f(b<c) - f(a<c) + gen_{b<c}(f(a<b))
            d1[k, idx1[(b, c)]] += 1
            d1[k, idx1[(a, c)]] -= 1
            if self.stalk[b] and self.gen(b, c):
                d1[k, idx1[(a, b)]] += 1
        cx = CochainComplex([len(c0), len(pairs), len(triples)],
                            [d0 % self.p, d1 % self.p], self.p)
        return cx, [c0, pairs, triples]

    def restriction_chain_map(self, chains_u, chains_v):
        """Projection chain map RGamma(U) -> RGamma(V) for V inside U."""
        maps = []
        for q in range(3):
            src = {ch: k for k, ch in enumerate(chains_u[q])}
            M = np.zeros((len(chains_v[q]), len(chains_u[q])), dtype=np.int64)
            for r, ch in enumerate(chains_v[q]):
                M[r, src[ch]] = 1
            maps.append(M)
        return maps


def _axis_reps(cuts):
    """Sample coordinates hitting every cell of the induced 1-d stratification."""
    cuts = sorted(cuts)
    if not cuts:
        return [0.0, 1.0]
    reps = [cuts[0] - 2.0, cuts[0] - 1.0]
    for a, b in zip(cuts, cuts[1:]):
        g = b - a
        reps += [a, a + g / 4, a + g / 2, a + 3 * g / 4]
    reps += [cuts[-1], cuts[-1] + 1.0, cuts[-1] + 2.0]
    return reps


def _sign(x):
    return 0 if x == 0 else (1 if x > 0 else -1)


@dataclass
class PlaneArrangement:
    """Arrangement of vertical/horizontal lines at the cuts plus the diagonal."""

    cuts: list
    with_diagonal: bool = True

    def __post_init__(self):
        self.cuts = sorted(set(self.cuts))
        reps = _axis_reps(self.cuts)
        seen = {}
        cells = []
        for x in reps:
            for y in reps:
                sv = self._sign_vector(x, y)
                if sv not in seen:
                    seen[sv] = len(cells)
                    cells.append((sv, (x, y)))
        self.cells = cells
        self.index = seen
        self.cell_dim = [self._dim(sv) for sv, _ in cells]
        less = set()
        for i, (si, _) in enumerate(cells):
            for j, (sj, _) in enumerate(cells):
                if i == j:
                    continue
                if all(a == b or a == 0 for a, b in zip(si, sj)) and self.cell_dim[i] < self.cell_dim[j]:
                    less.add((i, j))
        self.less = less

    def _sign_vector(self, x, y):
        sv = [_sign(x - c) for c in self.cuts]
        sv += [_sign(y - c) for c in self.cuts]
        if self.with_diagonal:
            sv.append(_sign(x - y))
        return tuple(sv)

    def _dim(self, sv):
        m = len(self.cuts)
        normals = []
        for i in range(m):
            if sv[i] == 0:
                normals.append((1.0, 0.0))
        for i in range(m):
            if sv[m + i] == 0:
                normals.append((0.0, 1.0))
        if self.with_diagonal and sv[2 * m] == 0:
            normals.append((1.0, -1.0))
        if not normals:
            return 2
        return 2 - np.linalg.matrix_rank(np.array(normals))

    def cells_with(self, predicate):
        return [i for i, (_, pt) in enumerate(self.cells) if predicate(pt)]

    def y_cell_of(self, i):
        """Index of the y-projection on the vertex line 0..2m (even = strata)."""
        y = self.cells[i][1][1]
        for k, c in enumerate(self.cuts):
            if y == c:
                return 2 * k + 1
            if y < c:
                return 2 * k
        return 2 * len(self.cuts)


# ---------------------------------------------------------------------------
# membership predicates for bars
# ---------------------------------------------------------------------------

def _bar_keys(b: Bar):
    return b.left.left_key(), b.right.right_key()


def point_in_bar(b: Bar, x: float) -> bool:
    lk, rk = _bar_keys(b)
    return lk <= (x, 0) and (x, 1) <= rk


# ---------------------------------------------------------------------------
# sections of a barcode over a window, computed cellularly
# ---------------------------------------------------------------------------

@dataclass
class LineStratification:
    """Cuts strictly inside an open window; cells are points and strata."""

    window: tuple
    cuts: list

    def __post_init__(self):
        u0, u1 = self.window
        self.cuts = sorted(c for c in set(self.cuts) if u0 < c < u1)
        k = len(self.cuts)
        self.n = 2 * k + 1
        self.cell_dim = [1 if i % 2 == 0 else 0 for i in range(self.n)]
        self.less = {(2 * i + 1, 2 * i) for i in range(k)} | {(2 * i + 1, 2 * i + 2) for i in range(k)}

    def sample(self, i):
        u0, u1 = self.window
        pts = [u0] + self.cuts + [u1]
        if i % 2 == 1:
            return self.cuts[(i - 1) // 2]
        lo, hi = pts[i // 2], pts[i // 2 + 1]
        if lo == NEG_INF and hi == POS_INF:
            return 0.0
        if lo == NEG_INF:
            return hi - 1.0
        if hi == POS_INF:
            return lo + 1.0
        return (lo + hi) / 2


def sections_over_window_cellular(bc: Barcode, window, p: int | None = None) -> dict:
    """Graded section dimensions of a barcode over an open window.

    Independent of the closed-form table: builds the window's face poset
    and takes the derived limit, one bar at a time.
    """
    p = p or bc.coefficients.p
    u0, u1 = window
    a, b = bc.ambient
    u0, u1 = max(u0, a), min(u1, b)
    out: dict[int, int] = {}
    if not u0 < u1:
        return out
    for br in bc.bars:
        strat = LineStratification((u0, u1), [e.value for e in (br.left, br.right) if not e.is_ambient])
        stalk = [1 if point_in_bar(br, strat.sample(i)) else 0 for i in range(strat.n)]
        sheaf = CellSheaf(strat.n, strat.cell_dim, strat.less, stalk, p)
        cx, _ = sheaf.rgamma(list(range(strat.n)))
        data = cohomology_reps(cx)
        for j in range(3):
            h = data[j]["h"]
            if h:
                deg = j - br.degree
                out[deg] = out.get(deg, 0) + h
    return {d: n for d, n in out.items() if n}


# ---------------------------------------------------------------------------
# convolution kernels on a single bar, evaluated cellularly
# ---------------------------------------------------------------------------

def _sentinelize(v, lo, hi):
    """Map ambient-touching coordinates of the input bar onto infinite ends."""
    if v == lo:
        return NEG_INF
    if v == hi:
        return POS_INF
    return v


def p_pushforward_cellular(br: Bar, side: str, p: int = 2) -> list:
    """Direct pushforward of the left/right half-line kernel on one bar.

    Returns [(Bar over the real line, total degree)] computed from the
    plane arrangement: stalks of the pushforward over the y-line come
    from sections over horizontal strips, the generization maps from
    restriction of chains, and the result is read off as a zigzag
    presentation per cohomological degree.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    cuts = sorted({e.value for e in (br.left, br.right) if not e.is_ambient})
    arr = PlaneArrangement(cuts, with_diagonal=True)

    def member(pt):
        x, y = pt
        if not point_in_bar(Bar(br.left, br.right, 0), x):
            return 0
        return 1 if ((x <= y) if side == "left" else (x >= y)) else 0

    stalk = [member(pt) for _, pt in arr.cells]
    sheaf = CellSheaf(len(arr.cells), arr.cell_dim, arr.less, stalk, p)

    m = len(cuts)
    ycells = {j: [] for j in range(2 * m + 1)}
    for i in range(len(arr.cells)):
        ycells[arr.y_cell_of(i)].append(i)

    def strip(vs):
        out = []
        for v in vs:
            out += ycells[v]
        return out

    # stalk complexes on the y-line vertex by vertex, with generizations
    complexes, chains = {}, {}
    for v in range(2 * m + 1):
        vs = [v] if v % 2 == 0 else [v - 1, v, v + 1]
        cx, ch = sheaf.rgamma(strip(vs))
        complexes[v], chains[v] = cx, ch
    data = {v: cohomology_reps(complexes[v]) for v in complexes}

    results = []
    for j in range(3):
        pt_dims = tuple(data[2 * i + 1][j]["h"] for i in range(m))
        st_dims = tuple(data[2 * i][j]["h"] for i in range(m + 1))
        lambdas, rhos = [], []
        for i in range(m):
            v = 2 * i + 1
            lam_chain = sheaf.restriction_chain_map(chains[v], chains[v - 1])
            rho_chain = sheaf.restriction_chain_map(chains[v], chains[v + 1])
            lambdas.append(induced_on_cohomology(data[v], data[v - 1], lam_chain, j, p))
            rhos.append(induced_on_cohomology(data[v], data[v + 1], rho_chain, j, p))
        pres = ZigzagPresentation(tuple(cuts), pt_dims, st_dims,
                                  tuple(lambdas), tuple(rhos), FieldConfig(p))
        for out_bar in decompose(pres).bars:
            results.append(Bar(out_bar.left, out_bar.right, br.degree - j))
    return results


def verdier_dual_bar(br: Bar) -> Bar:
    """Formal duality on interval summands of the line.

    Finite ends swap open/closed and the degree flips around 1; a point
    summand is self-dual in degree 0.
    """
    is_point = (not br.left.is_ambient and not br.right.is_ambient
                and br.left.value == br.right.value)
    if is_point:
        return Bar(br.left, br.right, -br.degree)
    left = br.left if br.left.is_ambient else Endpoint.at(br.left.value, not br.left.closed)
    right = br.right if br.right.is_ambient else Endpoint.at(br.right.value, not br.right.closed)
    return Bar(left, right, 1 - br.degree)


def q_pushforward_cellular(br: Bar, side: str, p: int = 2) -> list:
    """Hom-kernel companion of p_pushforward_cellular, via duality.

    The proper pushforward against the hom kernel is dual to the tensor
    pushforward for the opposite half-line, so the oracle conjugates the
    direct cellular computation by the formal interval duality.
    """
    dual = verdier_dual_bar(br)
    opposite = "right" if side == "left" else "left"
    return [verdier_dual_bar(ob) for ob in p_pushforward_cellular(dual, opposite, p)]
