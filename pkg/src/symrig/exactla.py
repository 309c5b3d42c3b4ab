"""Exact linear algebra over prime fields GF(p) and over the rationals.

Matrices over GF(p) are numpy int64 arrays with entries reduced mod p.
Row reduction is vectorized; inverses use Fermat's little theorem, so p
must be prime.  The rational routines work on Fraction entries and are
only meant for small dimensions (symplectic subspace checks).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _as_mod(M, p: int) -> np.ndarray:
    A = np.asarray(M, dtype=np.int64) % p
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    return A


def row_echelon_mod(M, p: int):
    """Row-reduce M over GF(p).

    Returns (R, pivot_cols) with R in reduced row-echelon form.
    """
    R = _as_mod(M, p).copy()
    m, n = R.shape
    pivot_cols: list[int] = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        sub = R[row:, col]
        nz = np.nonzero(sub)[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        inv = pow(int(R[row, col]), p - 2, p)
        R[row] = (R[row] * inv) % p
        # eliminate everywhere else in this column
        other = np.nonzero(R[:, col])[0]
        other = other[other != row]
        if other.size:
            R[other] = (R[other] - np.outer(R[other, col], R[row])) % p
        pivot_cols.append(col)
        row += 1
    return R, pivot_cols


def rank_mod(M, p: int) -> int:
    A = _as_mod(M, p)
    if A.size == 0:
        return 0
    _, piv = row_echelon_mod(A, p)
    return len(piv)


def nullspace_mod(M, p: int) -> np.ndarray:
    """Basis of ker(M) over GF(p), returned as columns (n x nullity)."""
    A = _as_mod(M, p)
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    R, piv = row_echelon_mod(A, p)
    free = [j for j in range(n) if j not in piv]
    basis = np.zeros((n, len(free)), dtype=np.int64)
    for k, j in enumerate(free):
        basis[j, k] = 1
        for r, pc in enumerate(piv):
            basis[pc, k] = (-R[r, j]) % p
    return basis


def solve_mod(A, B, p: int):
    """Solve A X = B over GF(p); returns X or None if inconsistent."""
    A = _as_mod(A, p)
    B = _as_mod(B, p)
    m, n = A.shape
    aug = np.concatenate([A, B], axis=1)
    R, piv = row_echelon_mod(aug, p)
    if any(c >= n for c in piv):
        return None
    X = np.zeros((n, B.shape[1]), dtype=np.int64)
    for r, pc in enumerate(piv):
        X[pc] = R[r, n:]
    return X % p


# -- exact rational rank (small dimensions) ---------------------------------

def rational_rank(rows) -> int:
    """Rank of a matrix with Fraction/int entries, by exact elimination."""
    M = [[Fraction(x) for x in row] for row in rows]
    if not M:
        return 0
    m, n = len(M), len(M[0])
    rank = 0
    row = 0
    for col in range(n):
        piv = None
        for r in range(row, m):
            if M[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        M[row], M[piv] = M[piv], M[row]
        inv = 1 / M[row][col]
        M[row] = [x * inv for x in M[row]]
        for r in range(m):
            if r != row and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[row])]
        rank += 1
        row += 1
        if row == m:
            break
    return rank


def is_exactly_representable(A) -> bool:
    """True if every entry of A is an int, Fraction, or integral float."""
    arr = np.asarray(A)
    if arr.dtype == object:
        return all(isinstance(x, (int, Fraction)) for x in arr.flat)
    return bool(np.all(arr == np.round(arr)))
