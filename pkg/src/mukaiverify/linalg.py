"""Dense exact linear algebra over F_p (numpy) and QQ (Fractions).

Every routine takes the domain object first.  Prime-field matrices are
``int64`` arrays with entries in [0, p); rational matrices are lists of lists
of :class:`~fractions.Fraction`.  Pivoting is deterministic (first nonzero
row in the current column), so echelon forms are reproducible.
"""

from __future__ import annotations

import random
from fractions import Fraction

import numpy as np


def as_matrix(field, rows, ncols: int | None = None):
    """Normalise ``rows`` into the native matrix type of ``field``."""
    if field.numpy_ok:
        A = np.array(rows, dtype=np.int64)
        if A.size == 0:
            return np.zeros((len(rows) if ncols is None else 0, ncols or 0), dtype=np.int64)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        return A % field.p
    out = [[field.convert(x) for x in row] for row in rows]
    return out


def _rref_mod(A: np.ndarray, p: int, full: bool = True):
    A = np.array(A, dtype=np.int64, copy=True) % p
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = A[r, c:] * inv % p
        col = A[:, c].copy()
        col[r] = 0
        if not full:
            col[:r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            A[rows, c:] = (A[rows, c:] - np.outer(col[rows], A[r, c:]) % p) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def _rref_qq(rows, ncols: int):
    A = [list(map(Fraction, row)) for row in rows]
    m = len(A)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        k = next((i for i in range(r, m) if A[i][c] != 0), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        pr = A[r]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                row = A[i]
                A[i] = [x - f * y if y else x for x, y in zip(row, pr)]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rref(field, rows, ncols: int | None = None):
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    if field.numpy_ok:
        A = as_matrix(field, rows, ncols)
        if A.shape[0] == 0:
            return A.reshape(0, A.shape[1] if A.ndim == 2 else (ncols or 0)), []
        return _rref_mod(A, field.p)
    rows = as_matrix(field, rows)
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    return _rref_qq(rows, ncols)


def rank(field, rows, ncols: int | None = None) -> int:
    if field.numpy_ok:
        A = as_matrix(field, rows, ncols)
        if A.shape[0] == 0:
            return 0
        return len(_rref_mod(A, field.p, full=False)[1])
    return len(rref(field, rows, ncols)[1])


def nullspace(field, rows, ncols: int):
    """Basis of {v : A v = 0} as a list of vectors (rows)."""
    R, pivots = rref(field, rows, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    if field.numpy_ok:
        p = field.p
        for f in free:
            v = np.zeros(ncols, dtype=np.int64)
            v[f] = 1
            for i, c in enumerate(pivots):
                v[c] = -R[i, f] % p
            basis.append(v)
        return basis
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][f]
        basis.append(v)
    return basis


def reduce_against(field, vec, R, pivots):
    """Reduce ``vec`` modulo the row space of an RREF matrix."""
    if field.numpy_ok:
        v = np.array(vec, dtype=np.int64) % field.p
        for i, c in enumerate(pivots):
            if v[c]:
                v = (v - v[c] * R[i]) % field.p
        return v
    v = [Fraction(x) for x in vec]
    for i, c in enumerate(pivots):
        if v[c]:
            f = v[c]
            v = [x - f * y for x, y in zip(v, R[i])]
    return v


def is_zero_vector(field, v) -> bool:
    if field.numpy_ok:
        return not np.any(v)
    return all(x == 0 for x in v)


def full_column_rank(field, rows, ncols: int, seed: int = 0) -> bool:
    """Certify rank(A) == ncols.

    Tall prime-field matrices are first compressed by a random left factor;
    rank(RA) <= rank(A), so a full-rank answer is always a certificate and a
    negative answer is wrong only with probability ~ ncols / p.  The caller
    treats negatives as "not certified", never as disproof.
    """
    if not field.numpy_ok:
        return rank(field, rows, ncols) == ncols
    A = as_matrix(field, rows, ncols)
    m = A.shape[0]
    if m < ncols:
        return False
    p = field.p
    target = ncols + 8
    if m > 2 * target and p < 2**20 and m < 2**20:
        rng = np.random.default_rng(seed)
        S = rng.integers(0, p, size=(target, m)).astype(np.float64)
        # entries < 2^20 and 4096-row chunks keep float64 partial sums exact
        acc = np.zeros((target, ncols), dtype=np.int64)
        chunk = 4096
        for s in range(0, m, chunk):
            part = S[:, s:s + chunk] @ A[s:s + chunk].astype(np.float64)
            acc = (acc + np.mod(part, p).astype(np.int64)) % p
        A = acc
    return rank(field, A, ncols) == ncols


def random_matrix(field, m: int, n: int, rng: random.Random):
    return [[field.random(rng) for _ in range(n)] for _ in range(m)]


def matmul(field, A, B):
    if field.numpy_ok:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        p = field.p
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        # chunk the inner dimension so int64 accumulation cannot overflow
        step = max(1, (2**62) // (p * p))
        for s in range(0, A.shape[1], step):
            out = (out + A[:, s:s + step] @ B[s:s + step]) % p
        return out
    n = len(B[0]) if B else 0
    return [[sum((a * B[k][j] for k, a in enumerate(row)), Fraction(0)) for j in range(n)]
            for row in A]


def determinant(field, rows):
    """Determinant by elimination (square matrices only)."""
    n = len(rows)
    A = [[field.convert(x) for x in row] for row in rows]
    det = field.one
    for c in range(n):
        k = next((i for i in range(c, n) if not field.is_zero(A[i][c])), None)
        if k is None:
            return field.zero
        if k != c:
            A[c], A[k] = A[k], A[c]
            det = field.neg(det)
        det = field.mul(det, A[c][c])
        inv = field.inv(A[c][c])
        for i in range(c + 1, n):
            if not field.is_zero(A[i][c]):
                f = field.mul(A[i][c], inv)
                A[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(A[i], A[c])]
    return det
