"""Exact dense linear algebra over a prime field F_p.

Matrices are numpy int64 arrays with entries normalized to [0, p).  All
homological computations in this package reduce to the rank / kernel /
cokernel routines here.  Everything is deterministic: echelon forms are fully
reduced with leading coefficient 1, pivots are chosen at the smallest
available index, so downstream bases are reproducible bit for bit.

p must be an odd prime.  With p < 2**15.5 all intermediate products fit
comfortably in int64 (|a*b| < p**2 ~ 1.02e9).
"""

from __future__ import annotations

import numpy as np

DEFAULT_PRIME = 32003


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.int64)
    if m.ndim != 2:
        raise ValueError("expected a 2d array")
    return m


def normalize(a, p: int) -> np.ndarray:
    return _as_matrix(a) % p


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("no inverse of 0 mod p")
    return pow(a, p - 2, p)


def matmul(a, b, p: int) -> np.ndarray:
    a = normalize(a, p)
    b = normalize(b, p)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if a.shape[1] == 0:
        return zeros(a.shape[0], b.shape[1])
    # block the contraction axis so partial sums stay below int64 overflow
    step = max(1, (1 << 62) // (p * p))
    if a.shape[1] <= step:
        return (a @ b) % p
    acc = zeros(a.shape[0], b.shape[1])
    for k in range(0, a.shape[1], step):
        acc = (acc + a[:, k:k + step] @ b[k:k + step, :]) % p
    return acc


def rref(a, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Returns (R, pivot_cols) where R has rank(a) rows, each pivot entry is 1
    and pivot columns are cleared above and below.
    """
    A = normalize(a, p).copy()
    m, n = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        A[r, c:] = (A[r, c:] * inv_mod(int(A[r, c]), p)) % p
        rows = np.nonzero(A[:, c])[0]
        rows = rows[rows != r]
        if rows.size:
            # pivot rows vanish left of their pivot column, so updating the
            # right part keeps the reduction exact
            A[np.ix_(rows, np.arange(c, n))] = \
                (A[np.ix_(rows, np.arange(c, n))]
                 - np.outer(A[rows, c], A[r, c:])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(a, p: int) -> int:
    """Rank over F_p (Gaussian elimination, no full reduction)."""
    A = normalize(a, p).copy()
    m, n = A.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            A[[r, i]] = A[[i, r]]
        inv = inv_mod(int(A[r, c]), p)
        below = np.nonzero(A[r + 1:, c])[0]
        if below.size:
            rows = r + 1 + below
            factors = (A[rows, c] * inv) % p
            A[np.ix_(rows, np.arange(c, n))] = \
                (A[np.ix_(rows, np.arange(c, n))]
                 - np.outer(factors, A[r, c:])) % p
        r += 1
    return r


def kernel_basis(a, p: int) -> np.ndarray:
    """Basis of the null space, as columns in reduced column echelon form.

    Column k has a 1 in the row of its free variable and zeros in the free
    rows of every other column, so coordinates of a vector in the span are
    read off at the free indices (see kernel_pivots).
    """
    A = normalize(a, p)
    m, n = A.shape
    R, pivots = rref(A, p)
    free = [c for c in range(n) if c not in pivots]
    B = zeros(n, len(free))
    for k, f in enumerate(free):
        B[f, k] = 1
        for i, pc in enumerate(pivots):
            B[pc, k] = (-int(R[i, f])) % p
    return B


def kernel_pivots(a, p: int) -> list[int]:
    """Free-variable indices: pivot rows of kernel_basis(a)."""
    _, pivots = rref(a, p)
    n = _as_matrix(a).shape[1]
    return [c for c in range(n) if c not in pivots]


def solve(a, b, p: int):
    """Solve a @ x = b for a single column b; None when inconsistent."""
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    x = solve_matrix(a, b, p)
    return None if x is None else x[:, 0]


def solve_matrix(a, b, p: int):
    """Solve a @ X = B columnwise; None when inconsistent.

    Free variables are set to 0, so the solution is deterministic.
    """
    A = normalize(a, p)
    B = normalize(b, p)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    m, n = A.shape
    aug = np.concatenate([A, B], axis=1)
    R, pivots = rref(aug, p)
    if any(c >= n for c in pivots):
        return None
    X = zeros(n, B.shape[1])
    for i, c in enumerate(pivots):
        X[c] = R[i, n:]
    return X


def column_space_pivot_rows(a, p: int) -> list[int]:
    """Row indices where a basis of the column space of a has its pivots."""
    _, pivots = rref(_as_matrix(a).T, p)
    return pivots


def coker_basis(a, p: int) -> list[int]:
    """Row indices whose images form a basis of coker(a) = K^rows / im(a).

    Deterministic: smallest-index pivot-free rows first.
    """
    m = _as_matrix(a).shape[0]
    pivots = set(column_space_pivot_rows(a, p))
    return [r for r in range(m) if r not in pivots]


class Reducer:
    """Reduction modulo the column space of a matrix.

    Precomputes the RREF of the row space of a.T once; reduce() then maps any
    vector of K^rows to its canonical representative supported on the
    coker_basis rows, and coords() reads quotient coordinates.
    """

    def __init__(self, a, p: int):
        self.p = p
        a = _as_matrix(a)
        self.rows = a.shape[0]
        self.R, self.pivots = rref(a.T, p)
        self.quot = [r for r in range(self.rows) if r not in set(self.pivots)]

    def reduce(self, vecs) -> np.ndarray:
        """Reduce columns of vecs modulo the column space."""
        V = normalize(np.asarray(vecs, dtype=np.int64), self.p).copy()
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if self.R.shape[0]:
            coeffs = V[self.pivots, :]
            V = (V - self.R.T @ coeffs) % self.p
        return V

    def coords(self, vecs) -> np.ndarray:
        """Coordinates of vecs in the coker basis (rows = quot indices)."""
        return self.reduce(vecs)[self.quot, :]
