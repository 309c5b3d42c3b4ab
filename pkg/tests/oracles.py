"""Brute-force oracles shared by the test suite.

The decomposition oracle peels interval summands by exhaustive search
over embeddings and hyperplane complements; it is independent of the
rank-invariant route used by the library and only feasible at small
stalk dimensions.
"""

from __future__ import annotations

import itertools

import numpy as np

from symrig.barcode import Bar, Barcode, FieldConfig, ZigzagPresentation, _interval_to_bar
from symrig.exactla import nullspace_mod, solve_mod


def _nonzero_vectors(dim, p):
    for tup in itertools.product(range(p), repeat=dim):
        if any(tup):
            yield np.array(tup, dtype=np.int64)


def _hyperplanes(dim, p):
    """Codimension-one subspaces as (functional, basis-columns)."""
    seen = set()
    for f in _nonzero_vectors(dim, p):
        # normalize the leading entry to 1 to dedupe scalar multiples
        lead = next(i for i in range(dim) if f[i])
        inv = pow(int(f[lead]), p - 2, p)
        key = tuple((f * inv) % p)
        if key in seen:
            continue
        seen.add(key)
        yield np.array(key, dtype=np.int64), nullspace_mod(np.array([key]), p)


def _embeddings(v, w, dims, amaps, p):
    """All vertex-wise nonzero tuples forming a copy of the interval module."""
    verts = list(range(v, w + 1))
    odd = [u for u in verts if u % 2 == 1]
    # even vertices pick up their value from an in-range odd neighbour
    forced = {}
    free_even = []
    for u in verts:
        if u % 2 == 1:
            continue
        nbrs = [o for o in (u - 1, u + 1) if v <= o <= w]
        if nbrs:
            forced[u] = nbrs
        else:
            free_even.append(u)
    free = odd + free_even
    for combo in itertools.product(*[_nonzero_vectors(dims[u], p) for u in free]):
        x = dict(zip(free, combo))
        ok = True
        for u, nbrs in forced.items():
            vals = []
            for o in nbrs:
                key = (o, u)
                vals.append((amaps[key] @ x[o]) % p)
            if any(not val.any() for val in vals):
                ok = False
                break
            if len(vals) == 2 and not np.array_equal(vals[0], vals[1]):
                ok = False
                break
            x[u] = vals[0]
        if ok:
            yield x


def _complement(x, v, w, dims, amaps, p):
    """Search hyperplane products forming an invariant complement of x."""
    verts = list(range(v, w + 1))
    choices = []
    for u in verts:
        opts = [(f, basis) for (f, basis) in _hyperplanes(dims[u], p)
                if int(f @ x[u]) % p != 0]
        if not opts:
            return None
        choices.append(opts)
    m = len(dims)
    for combo in itertools.product(*choices):
        bases = {u: combo[i][1] for i, u in enumerate(verts)}
        for u in range(m):
            if u not in bases:
                bases[u] = np.eye(dims[u], dtype=np.int64)
        new_maps = {}
        good = True
        for (s, t), A in amaps.items():
            X = solve_mod(bases[t], (A @ bases[s]) % p, p)
            if X is None:
                good = False
                break
            new_maps[(s, t)] = X
        if good:
            new_dims = [bases[u].shape[1] for u in range(m)]
            return new_dims, new_maps
    return None


def _peel(dims, amaps, p):
    if not any(dims):
        return []
    m = len(dims)
    intervals = sorted(((v, w) for v in range(m) for w in range(v, m)),
                       key=lambda vw: (-(vw[1] - vw[0]), vw[0]))
    for (v, w) in intervals:
        if any(dims[u] == 0 for u in range(v, w + 1)):
            continue
        for x in _embeddings(v, w, dims, amaps, p):
            rest = _complement(x, v, w, dims, amaps, p)
            if rest is not None:
                return [(v, w)] + _peel(rest[0], rest[1], p)
    raise AssertionError("no interval summand found; not a module over the zigzag?")


def exhaustive_decompose(pres: ZigzagPresentation) -> Barcode:
    """Interval decomposition by exhaustive submodule search (small dims)."""
    pres.validate()
    p = pres.coefficients.p
    m = pres.n_vertices
    dims = [pres.vertex_dim(u) for u in range(m)]
    assert max(dims, default=0) <= 2, "oracle is exponential; keep dims <= 2"
    amaps = {(s, t): np.asarray(A, dtype=np.int64) % p for (s, t, A) in pres.arrows()}
    bars = [_interval_to_bar(pres, v, w) for (v, w) in _peel(dims, amaps, p)]
    return Barcode(pres.ambient, tuple(bars), pres.coefficients)


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------

def random_presentation(rng, k=3, max_dim=3, p=2, ambient=(float("-inf"), float("inf"))):
    crits = tuple(sorted(rng.uniform(-5, 5, size=k)))
    pt = tuple(int(rng.integers(0, max_dim + 1)) for _ in range(k))
    st = tuple(int(rng.integers(0, max_dim + 1)) for _ in range(k + 1))
    lambdas = tuple(rng.integers(0, p, size=(st[i], pt[i])).astype(np.int64) for i in range(k))
    rhos = tuple(rng.integers(0, p, size=(st[i + 1], pt[i])).astype(np.int64) for i in range(k))
    return ZigzagPresentation(crits, pt, st, lambdas, rhos, FieldConfig(p), ambient).validate()


def random_positive_barcode(rng, n_bars=4, ambient=(float("-inf"), float("inf")),
                            degrees=(0,), grid=None):
    """Bars in the upward class: closed finite lefts, open finite rights."""
    from symrig.barcode import bar
    vals = grid if grid is not None else np.round(rng.uniform(-4, 4, size=12), 3)
    bars = []
    for _ in range(n_bars):
        kind = rng.integers(0, 4)
        deg = int(rng.choice(degrees))
        a, b = sorted(rng.choice(vals, size=2, replace=False))
        if kind == 0:
            bars.append(bar(float(a), float(b), deg))
        elif kind == 1:
            bars.append(bar(None, float(b), deg))
        elif kind == 2:
            bars.append(bar(float(a), None, deg))
        else:
            bars.append(bar(None, None, deg))
    return Barcode(ambient, tuple(bars), FieldConfig(2))
