"""
Exact integer lattice algebra: Hermite and Smith normal forms.

Matrices are lists of rows of Python ints, so arithmetic never overflows.
The lattice of a matrix is the Z-span of its rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


def _copy(M):
    return [list(map(int, r)) for r in M]


def _width(M, cols=None):
    if cols is not None:
        return cols
    return len(M[0]) if M else 0


def xgcd(a: int, b: int):
    """(g, s, t) with g = s*a + t*b = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    return a, s0, t0


def hermite_normal_form(M, cols: int | None = None):
    """Row-style Hermite normal form.

    Pivots are positive and move strictly right; entries above a pivot lie
    in [0, pivot); zero rows are moved to the bottom so the shape is kept.

    >>> hermite_normal_form([[2, 4], [6, 8]])
    [[2, 0], [0, 4]]
    """
    A = _copy(M)
    m = len(A)
    n = _width(A, cols)
    r = 0
    pivots = []
    for c in range(n):
        if r == m:
            break
        # gcd-combine all rows r.. into row r at column c
        for i in range(r + 1, m):
            if A[i][c]:
                a, b = A[r][c], A[i][c]
                g, s, t = xgcd(a, b)
                u, v = a // g, b // g
                Rr, Ri = A[r], A[i]
                A[r] = [s * x + t * y for x, y in zip(Rr, Ri)]
                A[i] = [u * y - v * x for x, y in zip(Rr, Ri)]
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
        piv = A[r][c]
        for i in range(r):
            q = A[i][c] // piv
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A


def _insert(basis: dict, row, cols: int):
    """Insert one row into an echelon basis {pivot column: row}, in place."""
    v = list(map(int, row))
    c = 0
    while True:
        while c < cols and v[c] == 0:
            c += 1
        if c == cols:
            return
        b = basis.get(c)
        if b is None:
            if v[c] < 0:
                v = [-x for x in v]
            basis[c] = v
            return
        a, x = b[c], v[c]
        if x % a == 0:
            q = x // a
            v = [vi - q * bi for vi, bi in zip(v, b)]
        else:
            g, s, t = xgcd(a, x)
            u, w = a // g, x // g
            basis[c] = [s * bi + t * vi for bi, vi in zip(b, v)]
            v = [u * vi - w * bi for bi, vi in zip(b, v)]
        c += 1


class LatticeAccumulator:
    """Row lattice built incrementally from many (mostly redundant) rows.

    Incoming rows are first reduced against the current Hermite basis with
    vectorized int64 arithmetic while entries stay small; only rows that
    survive the reduction are inserted exactly.  The lattice is always the
    span of every row added so far.
    """

    SAFE = 2 ** 30
    CHUNK = 4096

    def __init__(self, cols: int):
        self.cols = cols
        self.basis = []      # nonzero Hermite rows, exact ints
        self.kept = []       # (residue, tag) for each row that enlarged the lattice

    def _absorb(self, row):
        table = {}
        for r in self.basis:
            _insert(table, r, self.cols)
        _insert(table, row, self.cols)
        rows = [table[c] for c in sorted(table)]
        self.basis = [r for r in hermite_normal_form(rows, self.cols) if any(r)]

    def _small(self):
        return all(abs(x) < self.SAFE for r in self.basis for x in r)

    def _reduce(self, R):
        for b in self.basis:
            c = next(i for i, x in enumerate(b) if x)
            q = np.floor_divide(R[:, c], b[c])
            if q.any():
                R -= np.outer(q, np.asarray(b, dtype=np.int64))
        return R

    def _add_exact(self, row, tag):
        if not any(row) or (self.basis and in_lattice(row, self.basis)):
            return 0
        self._absorb(row)
        self.kept.append((row, tag))
        return 1

    def add(self, rows, tags=None) -> int:
        """Add rows (sequence or 2-d int array); returns how many enlarged the lattice."""
        n = len(rows)
        if n == 0:
            return 0
        tags = list(tags) if tags is not None else [None] * n
        if isinstance(rows, np.ndarray):
            R = rows.astype(np.int64, copy=False).reshape(n, self.cols)
            small = bool(np.abs(R).max() < self.SAFE)
        else:
            small = all(abs(int(x)) < self.SAFE for r in rows for x in r)
            R = np.array(rows, dtype=np.int64).reshape(n, self.cols) if small else None
        changed = 0
        if small:
            for start in range(0, n, self.CHUNK):
                if not self._small():
                    rest = [list(map(int, r)) for r in R[start:]]
                    return changed + self.add(rest, tags[start:])
                chunk = self._reduce(R[start:start + self.CHUNK].copy())
                live = np.flatnonzero(chunk.any(axis=1))
                while len(live):
                    k = live[0]
                    self._absorb([int(x) for x in chunk[k]])
                    self.kept.append(([int(x) for x in chunk[k]], tags[start + k]))
                    changed += 1
                    if not self._small():
                        rest = [list(map(int, r)) for r in R[start + k + 1:]]
                        return changed + self.add(rest, tags[start + k + 1:])
                    rest = live[1:]
                    chunk[rest] = self._reduce(chunk[rest])
                    live = rest[chunk[rest].any(axis=1)]
            return changed
        for r, t in zip(rows, tags):
            changed += self._add_exact(list(map(int, r)), t)
        return changed


def lattice_basis(rows, cols: int):
    """Nonzero rows of the Hermite normal form of the row lattice."""
    acc = LatticeAccumulator(cols)
    acc.add(list(rows))
    return [list(r) for r in acc.basis]


def in_lattice(v, hnf_rows) -> bool:
    """Membership test against nonzero Hermite rows."""
    v = list(v)
    for r in hnf_rows:
        c = next(i for i, x in enumerate(r) if x)
        if v[c] % r[c]:
            return False
        q = v[c] // r[c]
        v = [a - q * b for a, b in zip(v, r)]
    return not any(v)


@dataclass
class SmithDecomposition:
    S: list
    P: list
    Q: list

    @property
    def diagonal(self):
        k = min(len(self.S), len(self.S[0]) if self.S else 0)
        return [self.S[i][i] for i in range(k)]


def _identity(k):
    return [[int(i == j) for j in range(k)] for i in range(k)]


def smith_normal_form(M, cols: int | None = None) -> SmithDecomposition:
    """S = P M Q with P, Q unimodular and S diagonal, d_1 | d_2 | ... .

    Pivots are chosen by smallest absolute value, ties broken by lowest row
    and then lowest column.
    """
    A = _copy(M)
    m = len(A)
    n = _width(A, cols)
    if m == 0:
        return SmithDecomposition([], [], _identity(n))
    P = _identity(m)
    Q = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        for R in A:
            R[i], R[j] = R[j], R[i]
        for R in Q:
            R[i], R[j] = R[j], R[i]

    def add_row(dst, src, q):  # row dst += q * row src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        P[dst] = [x + q * y for x, y in zip(P[dst], P[src])]

    def add_col(dst, src, q):  # col dst += q * col src
        for R in A:
            R[dst] += q * R[src]
        for R in Q:
            R[dst] += q * R[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
            # any remainder becomes the new, smaller pivot
            best = None
            for i in range(t + 1, m):
                if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                    best = (abs(A[i][t]), i, None)
            for j in range(t + 1, n):
                if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                    best = (abs(A[t][j]), None, j)
            if best is not None:
                _, i, j = best
                if i is not None:
                    swap_rows(t, i)
                else:
                    swap_cols(t, j)
                continue
            piv = A[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is not None:
                add_row(t, bad, 1)
                done = False
            if done:
                break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            P[t] = [-x for x in P[t]]
    return SmithDecomposition(A, P, Q)


class AbelianType(NamedTuple):
    torsion: tuple
    free_rank: int

    def __str__(self):
        parts = [f"Z_{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " x ".join(parts) if parts else "0"


def abelian_type(diagonal, width: int) -> AbelianType:
    nonzero = [abs(d) for d in diagonal if d]
    return AbelianType(tuple(d for d in nonzero if d > 1), width - len(nonzero))


def quotient_invariants(rows, l: int) -> AbelianType:
    """Invariants of Z^l modulo the row lattice."""
    rows = getattr(rows, "rows", rows)
    basis = lattice_basis(rows, l)
    return abelian_type(smith_normal_form(basis, l).diagonal, l)


def matmul(A, B):
    Bt = list(zip(*B)) if B else []
    return [[sum(x * y for x, y in zip(r, c)) for c in Bt] for r in A]


def determinant(M) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    A = _copy(M)
    k = len(A)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if A[i][i] == 0:
            for r in range(i + 1, k):
                if A[r][i]:
                    A[i], A[r] = A[r], A[i]
                    sign = -sign
                    break
            else:
                return 0
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                A[r][c] = (A[r][c] * A[i][i] - A[r][i] * A[i][c]) // prev
        prev = A[i][i]
    return sign * A[k - 1][k - 1]


def inverse_unimodular(M):
    """Inverse of a unimodular integer matrix (Gauss-Jordan on [M | I])."""
    k = len(M)
    A = [list(map(int, r)) + [int(i == j) for j in range(k)] for i, r in enumerate(M)]
    H = hermite_normal_form(A)
    for i in range(k):
        if H[i][i] != 1:
            raise ValueError("matrix is not unimodular")
    return [r[k:] for r in H[:k]]
