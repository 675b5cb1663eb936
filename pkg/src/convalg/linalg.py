"""Small exact linear algebra toolkit over the coefficient rings.

Matrices are plain lists of lists of Scalar, treated as immutable.  Field
routines (rref, rank, inverse, nullspace) run over Q or Q(i); matrices over
Z or Z[1/p] are lifted to the fraction field where only ranks/kernels are
needed.  Integer Smith normal form with unimodular transforms backs the
cokernel computation over Z, where torsion is meaningful.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .scalars import QI, QQ, Ring, Scalar, ScalarError, zero, one

Matrix = List[List[Scalar]]


def mat(ring: Ring, rows: Sequence[Sequence]) -> Matrix:
    return [[x if isinstance(x, Scalar) else Scalar(ring, Fraction(x)) for x in row] for row in rows]


def zeros(ring: Ring, m: int, n: int) -> Matrix:
    z = zero(ring)
    return [[z] * n for _ in range(m)]


def eye(ring: Ring, n: int) -> Matrix:
    z, u = zero(ring), one(ring)
    return [[u if i == j else z for j in range(n)] for i in range(n)]


def shape(a: Matrix) -> Tuple[int, int]:
    return (len(a), len(a[0]) if a else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    m, k = shape(a)
    k2, n = shape(b)
    if k != k2:
        raise ValueError(f"matmul shape mismatch {shape(a)} x {shape(b)}")
    if m == 0 or n == 0:
        return [[] for _ in range(m)]
    ring = a[0][0].ring if k else b[0][0].ring
    out = zeros(ring, m, n)
    for i in range(m):
        arow = a[i]
        orow = out[i]
        for t in range(k):
            ait = arow[t]
            if ait.is_zero():
                continue
            brow = b[t]
            for j in range(n):
                if not brow[j].is_zero():
                    orow[j] = orow[j] + ait * brow[j]
    return out


def mm(ring: Ring, a: Matrix, b: Matrix, m: int, k: int, n: int) -> Matrix:
    """matmul with explicit shapes, safe for zero-dimensional blocks."""
    if m == 0:
        return []
    if n == 0:
        return [[] for _ in range(m)]
    if k == 0:
        return zeros(ring, m, n)
    return matmul(a, b)


def madd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def msub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mscale(s: Scalar, a: Matrix) -> Matrix:
    return [[s * x for x in row] for row in a]


def transpose(a: Matrix) -> Matrix:
    m, n = shape(a)
    return [[a[i][j] for i in range(m)] for j in range(n)]


def star_transpose(a: Matrix) -> Matrix:
    m, n = shape(a)
    return [[a[i][j].star() for i in range(m)] for j in range(n)]


def mat_equal(a: Matrix, b: Matrix) -> bool:
    if shape(a) != shape(b):
        return False
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def is_zero_matrix(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def _field_of(ring: Ring) -> Ring:
    return QI if ring.kind == "Qi" else QQ


def lift_field(a: Matrix, ring: Ring) -> Tuple[Ring, Matrix]:
    """View a matrix over Z or Z[1/p] inside its fraction field."""
    fr = _field_of(ring)
    if fr == ring:
        return ring, a
    return fr, [[Scalar(fr, x.re, x.im) for x in row] for row in a]


def rref(a: Matrix, ring: Ring) -> Tuple[Matrix, List[int], Matrix]:
    """Reduced row echelon form over a field: returns (R, pivot_cols, T) with T a = R."""
    fr, a = lift_field(a, ring)
    m, n = shape(a)
    r = [row[:] for row in a]
    t = eye(fr, m)
    pivots: List[int] = []
    lead = 0
    for col in range(n):
        sel = None
        for i in range(lead, m):
            if not r[i][col].is_zero():
                sel = i
                break
        if sel is None:
            continue
        r[lead], r[sel] = r[sel], r[lead]
        t[lead], t[sel] = t[sel], t[lead]
        inv = r[lead][col].inverse()
        r[lead] = [inv * x for x in r[lead]]
        t[lead] = [inv * x for x in t[lead]]
        for i in range(m):
            if i != lead and not r[i][col].is_zero():
                f = r[i][col]
                r[i] = [x - f * y for x, y in zip(r[i], r[lead])]
                t[i] = [x - f * y for x, y in zip(t[i], t[lead])]
        pivots.append(col)
        lead += 1
        if lead == m:
            break
    return r, pivots, t


def rank(a: Matrix, ring: Ring) -> int:
    if not a or not a[0]:
        return 0
    _, pivots, _ = rref(a, ring)
    return len(pivots)


def inverse(a: Matrix, ring: Ring) -> Matrix:
    """Exact inverse over the fraction field; raises ScalarError if singular."""
    m, n = shape(a)
    if m != n:
        raise ScalarError(f"inverse of non-square {shape(a)}")
    r, pivots, t = rref(a, ring)
    if len(pivots) != n:
        raise ScalarError("matrix is singular")
    return t


def det(a: Matrix, ring: Ring) -> Scalar:
    fr, a = lift_field(a, ring)
    m, n = shape(a)
    if m != n:
        raise ScalarError("det of non-square matrix")
    r = [row[:] for row in a]
    d = one(fr)
    for col in range(n):
        sel = None
        for i in range(col, n):
            if not r[i][col].is_zero():
                sel = i
                break
        if sel is None:
            return zero(fr)
        if sel != col:
            r[col], r[sel] = r[sel], r[col]
            d = -d
        d = d * r[col][col]
        inv = r[col][col].inverse()
        for i in range(col + 1, n):
            if not r[i][col].is_zero():
                f = r[i][col] * inv
                r[i] = [x - f * y for x, y in zip(r[i], r[col])]
    return d


def solve_right(a: Matrix, b: Matrix, ring: Ring) -> Optional[Matrix]:
    """Some X with a @ X = b over the fraction field, or None if inconsistent."""
    m, n = shape(a)
    mb, k = shape(b)
    if m != mb:
        raise ValueError("solve shape mismatch")
    fr, a = lift_field(a, ring)
    _, b = lift_field(b, ring)
    aug = [a[i] + b[i] for i in range(m)]
    r, pivots, _ = rref(aug, fr)
    for p in pivots:
        if p >= n:
            return None
    x = zeros(fr, n, k)
    for lead, p in enumerate(pivots):
        for j in range(k):
            x[p][j] = r[lead][n + j]
    return x


def nullspace(a: Matrix, ring: Ring) -> Matrix:
    """Columns spanning ker(a) over the fraction field (n x d matrix)."""
    m, n = shape(a)
    fr, _ = lift_field(a, ring) if a else (_field_of(ring), a)
    if n == 0:
        return []
    if m == 0:
        return eye(fr, n)
    r, pivots, _ = rref(a, ring)
    free = [j for j in range(n) if j not in pivots]
    cols = []
    for f in free:
        v = [zero(fr) for _ in range(n)]
        v[f] = one(fr)
        for lead, p in enumerate(pivots):
            v[p] = -r[lead][f]
        cols.append(v)
    return [[cols[c][i] for c in range(len(cols))] for i in range(n)]


def left_nullspace(a: Matrix, ring: Ring) -> Matrix:
    """Rows y with y @ a = 0 (a d x m matrix of rows)."""
    ns = nullspace(transpose(a), ring)
    return transpose(ns)


def in_row_basis(rows: Matrix, basis: Matrix, ring: Ring) -> Optional[Matrix]:
    """X with X @ basis = rows, or None when some row leaves the span."""
    if not rows:
        return []
    if not basis:
        return None if any(not x.is_zero() for r in rows for x in r) else [[] for _ in rows]
    xt = solve_right(transpose(basis), transpose(rows), ring)
    if xt is None:
        return None
    x = transpose(xt)
    if not mat_equal(matmul(x, basis), rows):
        return None
    return x


def row_space_basis(a: Matrix, ring: Ring) -> Matrix:
    """Canonical (rref) row basis of the row space of a."""
    if not a or not a[0]:
        return []
    r, pivots, _ = rref(a, ring)
    return [r[k] for k in range(len(pivots))]


# -- integer Smith normal form -------------------------------------------


def smith_normal_form(a: List[List[int]]) -> Tuple[List[int], List[List[int]], List[List[int]]]:
    """Smith normal form of an integer matrix.

    Returns (d, L, R) where L a R is diagonal with diagonal d, the d_i are
    non-negative, each divides the next, and L, R are unimodular.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    A = [row[:] for row in a]
    L = [[int(i == j) for j in range(m)] for i in range(m)]
    R = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_op(i, j, q):  # row_i -= q * row_j
        A[i] = [x - q * y for x, y in zip(A[i], A[j])]
        L[i] = [x - q * y for x, y in zip(L[i], L[j])]

    def col_op(i, j, q):  # col_i -= q * col_j
        for r_ in range(m):
            A[r_][i] -= q * A[r_][j]
        for r_ in range(n):
            R[r_][i] -= q * R[r_][j]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        L[i], L[j] = L[j], L[i]

    def swap_cols(i, j):
        for r_ in range(m):
            A[r_][i], A[r_][j] = A[r_][j], A[r_][i]
        for r_ in range(n):
            R[r_][i], R[r_][j] = R[r_][j], R[r_][i]

    s = 0
    while s < min(m, n):
        # locate a minimal nonzero entry in the trailing block
        pos = None
        best = None
        for i in range(s, m):
            for j in range(s, n):
                v = abs(A[i][j])
                if v and (best is None or v < best):
                    best, pos = v, (i, j)
        if pos is None:
            break
        swap_rows(s, pos[0])
        swap_cols(s, pos[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(s + 1, m):
                if A[i][s]:
                    q = A[i][s] // A[s][s]
                    row_op(i, s, q)
                    if A[i][s]:
                        swap_rows(s, i)
                        dirty = True
            for j in range(s + 1, n):
                if A[s][j]:
                    q = A[s][j] // A[s][s]
                    col_op(j, s, q)
                    if A[s][j]:
                        swap_cols(s, j)
                        dirty = True
        # divisibility of the remaining block by the pivot
        fixup = None
        for i in range(s + 1, m):
            for j in range(s + 1, n):
                if A[i][j] % A[s][s]:
                    fixup = i
                    break
            if fixup is not None:
                break
        if fixup is not None:
            row_op(s, fixup, -1)  # add the offending row, restart the pivot
            continue
        if A[s][s] < 0:
            A[s] = [-x for x in A[s]]
            L[s] = [-x for x in L[s]]
        s += 1
    d = [A[i][i] for i in range(min(m, n))]
    return d, L, R


def coker_field(a: Matrix, ring: Ring) -> Tuple[int, Matrix, Matrix]:
    """Cokernel of a field matrix a: K^k -> K^n as (dim, proj, section).

    proj is (n-r) x n with proj @ a = 0 and proj surjective; section is a
    right inverse of proj, so classes are computed by proj and lifted by
    section.
    """
    n, _k = shape(a)
    fr = _field_of(ring)
    proj = left_nullspace(a, ring)
    if not proj:
        proj = []
    q = len(proj)
    if q == 0:
        return 0, [], zeros(fr, n, 0)
    section = solve_right(proj, eye(fr, q), fr)
    assert section is not None
    return q, proj, section
