"""Exact linear algebra over the rationals (and over Q(sqrt2)).

Matrices are lists of rows; entries are Fractions or QSqrt2 elements.
Everything is computed by fraction-free-enough Gaussian elimination with
exact arithmetic, so ranks, kernels and spans are certificates rather
than numerics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .numbers import QSqrt2

Row = List
Matrix = List[Row]


def _is_zero(x) -> bool:
    if isinstance(x, QSqrt2):
        return x.is_zero
    return x == 0


def _zero_like(x):
    return QSqrt2() if isinstance(x, QSqrt2) else Fraction(0)


def mat_copy(m: Matrix) -> Matrix:
    return [list(row) for row in m]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    cols = len(b[0]) if b else 0
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), _zero_start(a, b)) for j in range(cols)]
        for i in range(len(a))
    ]


def _zero_start(a, b):
    for m in (a, b):
        for row in m:
            for x in row:
                return _zero_like(x)
    return Fraction(0)


def mat_vec(a: Matrix, v: Sequence) -> list:
    return [sum((a[i][k] * v[k] for k in range(len(v))), _zero_like_vec(a, v)) for i in range(len(a))]


def _zero_like_vec(a, v):
    for x in v:
        return _zero_like(x)
    for row in a:
        for x in row:
            return _zero_like(x)
    return Fraction(0)


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref matrix, pivot columns)."""
    a = mat_copy(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if not _is_zero(a[i][c])), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = _invert(a[r][c])
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and not _is_zero(a[i][c]):
                f = a[i][c]
                a[i] = [a[i][j] - f * a[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def _invert(x):
    if isinstance(x, QSqrt2):
        return x.inverse()
    return Fraction(1) / x


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def nullspace(m: Matrix) -> Matrix:
    """Basis of {v : m v = 0}, one vector per free column."""
    if not m:
        return []
    cols = len(m[0])
    a, pivots = rref(m)
    one = _one_for(m)
    zero = one - one
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * cols
        v[f] = one
        for r, p in enumerate(pivots):
            v[p] = -a[r][f]
        basis.append(v)
    return basis


def _one_for(m: Matrix):
    for row in m:
        for x in row:
            z = _zero_like(x)
            return z + 1 if not isinstance(z, QSqrt2) else QSqrt2.coerce(1)
    return Fraction(1)


def solve(m: Matrix, b: Sequence):
    """One solution of m x = b, or None when inconsistent."""
    if not m:
        return None
    cols = len(m[0])
    aug = [list(row) + [b[i]] for i, row in enumerate(m)]
    a, pivots = rref(aug)
    if cols in pivots:
        return None
    zero = _zero_like(m[0][0]) if m and m[0] else Fraction(0)
    x = [zero] * cols
    for r, p in enumerate(pivots):
        x[p] = a[r][cols]
    return x


def inverse(m: Matrix) -> Matrix | None:
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("inverse of a non-square matrix")
    one = _one_for(m)
    zero = one - one
    aug = [list(m[i]) + [one if j == i else zero for j in range(n)] for i in range(n)]
    a, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [row[n:] for row in a]


def in_span(vectors: Matrix, v: Sequence) -> bool:
    """Is v in the row span of ``vectors``?"""
    if all(_is_zero(x) for x in v):
        return True
    if not vectors:
        return False
    return rank(vectors) == rank(vectors + [list(v)])


def span_basis(vectors: Matrix) -> Matrix:
    """Canonical (rref) basis of the row span."""
    if not vectors:
        return []
    a, pivots = rref(vectors)
    return a[: len(pivots)]


def annihilator(vectors: Matrix, dim: int) -> Matrix:
    """Basis of {phi : phi(v) = 0 for all v}, as row vectors in R^dim."""
    if not vectors:
        one = Fraction(1)
        return [[one if j == i else Fraction(0) for j in range(dim)] for i in range(dim)]
    return nullspace(vectors)


def intersect_spans(a: Matrix, b: Matrix, dim: int) -> Matrix:
    """Basis of span(a) ∩ span(b) inside R^dim."""
    if not a or not b:
        return []
    # v in both spans: v = x·a = y·b ; solve [aᵀ | -bᵀ] (x,y)ᵀ = 0
    stacked = [
        [a[i][d] for i in range(len(a))] + [-b[j][d] for j in range(len(b))]
        for d in range(dim)
    ]
    sols = nullspace(stacked)
    out = []
    for s in sols:
        x = s[: len(a)]
        v = [sum((x[i] * a[i][d] for i in range(len(a))), _zero_like(a[0][0])) for d in range(dim)]
        if not all(_is_zero(t) for t in v):
            out.append(v)
    return span_basis(out)


def pivot_complement(vectors: Matrix, dim: int) -> Matrix:
    """Lowest-index coordinate-subspace complement of span(vectors)."""
    basis = span_basis(vectors)
    chosen: Matrix = [list(row) for row in basis]
    out = []
    one = Fraction(1)
    for i in range(dim):
        e = [Fraction(0)] * dim
        e[i] = one
        if not in_span(chosen, e):
            chosen.append(e)
            out.append(e)
        if len(chosen) == dim:
            break
    return out
