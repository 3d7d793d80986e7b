"""Exact integer-matrix utilities: Hermite/Smith normal forms, kernels, saturation.

Matrices are lists of rows of Python ints; columns are generator vectors.
Everything is arbitrary precision.
"""

from __future__ import annotations

from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def _copy(mat: Sequence[Sequence[int]]) -> Matrix:
    return [list(row) for row in mat]


def transpose(mat: Sequence[Sequence[int]]) -> Matrix:
    if not mat:
        return []
    return [list(col) for col in zip(*mat)]


def row_hnf(mat: Sequence[Sequence[int]]) -> Matrix:
    """Canonical row-style Hermite normal form of the row span.

    Pivots are positive, entries above a pivot are reduced into [0, pivot),
    zero rows are dropped.  Two matrices have equal row span iff their HNFs
    are equal.
    """
    a = _copy(mat)
    if not a:
        return []
    rows, cols = len(a), len(a[0])
    pivot_row = 0
    for j in range(cols):
        # eliminate column j below pivot_row via the euclidean algorithm
        for i in range(pivot_row + 1, rows):
            while a[i][j] != 0:
                if a[pivot_row][j] == 0:
                    a[pivot_row], a[i] = a[i], a[pivot_row]
                    continue
                quot = a[i][j] // a[pivot_row][j]
                a[i] = [x - quot * y for x, y in zip(a[i], a[pivot_row])]
                if a[i][j] != 0:
                    a[pivot_row], a[i] = a[i], a[pivot_row]
        if a[pivot_row][j] != 0:
            if a[pivot_row][j] < 0:
                a[pivot_row] = [-x for x in a[pivot_row]]
            piv = a[pivot_row][j]
            for i in range(pivot_row):
                quot = a[i][j] // piv
                if quot:
                    a[i] = [x - quot * y for x, y in zip(a[i], a[pivot_row])]
            pivot_row += 1
            if pivot_row == rows:
                break
    return [row for row in a[:pivot_row]]


def column_hnf(columns: Sequence[Sequence[int]]) -> List[List[int]]:
    """Canonical form of the lattice spanned by the given column vectors.

    Returned as a list of column vectors (the row HNF of the transpose,
    transposed back).
    """
    return transpose(row_hnf(columns))


def lattice_key(columns: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    """Hashable canonical key for a column-generated lattice."""
    return tuple(tuple(row) for row in row_hnf(columns))


def rank(mat: Sequence[Sequence[int]]) -> int:
    return len(row_hnf(mat))


def kernel(mat: Sequence[Sequence[int]]) -> List[List[int]]:
    """Basis (list of vectors) of the integer kernel {x : mat @ x = 0}.

    The kernel of an integer matrix is automatically saturated.
    """
    a = _copy(mat)
    if not a:
        return []
    rows, cols = len(a), len(a[0])
    u = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def addcol(dst, src, factor):
        for i in range(rows):
            a[i][dst] -= factor * a[i][src]
        for i in range(cols):
            u[i][dst] -= factor * u[i][src]

    def swapcol(c1, c2):
        for i in range(rows):
            a[i][c1], a[i][c2] = a[i][c2], a[i][c1]
        for i in range(cols):
            u[i][c1], u[i][c2] = u[i][c2], u[i][c1]

    pivot_col = 0
    for i in range(rows):
        j = pivot_col
        while j < cols:
            if a[i][j] != 0:
                break
            j += 1
        else:
            continue
        swapcol(pivot_col, j)
        for j in range(pivot_col + 1, cols):
            while a[i][j] != 0:
                if a[i][pivot_col] == 0:
                    swapcol(pivot_col, j)
                    continue
                quot = a[i][j] // a[i][pivot_col]
                addcol(j, pivot_col, quot)
                if a[i][j] != 0:
                    swapcol(pivot_col, j)
        pivot_col += 1
        if pivot_col == cols:
            break
    basis = []
    for j in range(pivot_col, cols):
        if all(a[i][j] == 0 for i in range(rows)):
            basis.append([u[i][j] for i in range(cols)])
    return basis


def saturation(columns: Sequence[Sequence[int]]) -> List[List[int]]:
    """Saturation of the lattice spanned by the given column vectors.

    Returns a basis (list of vectors) of (Q-span of columns) ∩ Z^n.
    """
    cols = [list(c) for c in columns]
    if not cols:
        return []
    perp = kernel(cols)  # forms vanishing on the span
    if not perp:
        n = len(cols[0])
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return kernel(perp)


def smith_normal_form(mat: Sequence[Sequence[int]]) -> List[int]:
    """Nonzero elementary divisors d1 | d2 | ... of the matrix."""
    a = _copy(mat)
    if not a or not a[0]:
        return []
    rows, cols = len(a), len(a[0])
    divisors = []
    top = 0
    while top < min(rows, cols):
        # find a nonzero pivot
        found = None
        for i in range(top, rows):
            for j in range(top, cols):
                if a[i][j] != 0:
                    found = (i, j)
                    break
            if found:
                break
        if not found:
            break
        i0, j0 = found
        a[top], a[i0] = a[i0], a[top]
        for r in range(rows):
            a[r][top], a[r][j0] = a[r][j0], a[r][top]
        while True:
            # clear row and column `top`
            dirty = False
            for i in range(top + 1, rows):
                while a[i][top] != 0:
                    quot = a[i][top] // a[top][top]
                    a[i] = [x - quot * y for x, y in zip(a[i], a[top])]
                    if a[i][top] != 0:
                        a[top], a[i] = a[i], a[top]
                        dirty = True
            for j in range(top + 1, cols):
                while a[top][j] != 0:
                    quot = a[top][j] // a[top][top]
                    for r in range(rows):
                        a[r][j] -= quot * a[r][top]
                    if a[top][j] != 0:
                        for r in range(rows):
                            a[r][top], a[r][j] = a[r][j], a[r][top]
                        dirty = True
            if not dirty:
                break
        # pivot must divide the remaining block
        piv = abs(a[top][top])
        bad = None
        for i in range(top + 1, rows):
            for j in range(top + 1, cols):
                if a[i][j] % piv != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            a[top] = [x + y for x, y in zip(a[top], a[bad])]
            continue
        divisors.append(piv)
        top += 1
    # enforce divisibility chain (the block-division loop already does, but
    # normalize pairs defensively)
    for i in range(len(divisors) - 1):
        for j in range(i + 1, len(divisors)):
            g = gcd(divisors[i], divisors[j])
            lcm = divisors[i] * divisors[j] // g
            divisors[i], divisors[j] = g, lcm
    return divisors


def in_span(columns: Sequence[Sequence[int]], vec: Sequence[int]) -> bool:
    """Whether vec lies in the integer column span."""
    base = row_hnf(transpose(columns))
    aug = row_hnf(base + [list(vec)])
    return aug == base


def quotient_is_torsion_free(columns: Sequence[Sequence[int]], ambient_dim: int) -> bool:
    """Whether Z^n / (column span) is torsion free (all elementary divisors 1)."""
    cols = [list(c) for c in columns]
    if not cols:
        return True
    divisors = smith_normal_form(cols)
    return all(d == 1 for d in divisors)
