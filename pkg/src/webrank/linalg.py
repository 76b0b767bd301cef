"""Exact dense linear algebra over the rationals and over truncated jets.

Matrices are plain lists of rows. Rational entries are ``mpq``; jet matrices
hold ``Jet`` entries sharing one base point.
"""
from __future__ import annotations

from typing import Sequence

import gmpy2

from .jets import Jet
from .rational import Q, bit_size


class LinAlgError(ArithmeticError):
    pass


class RankDeficientError(LinAlgError):
    """No invertible square row submatrix exists."""


class RankDropError(LinAlgError):
    """The jet matrix does not have the expected constant rank near its base."""


class InconsistentSystemError(LinAlgError):
    """Right-hand side is not in the column span (nonzero residual)."""


def shape(m: Sequence[Sequence]) -> tuple:
    return (len(m), len(m[0]) if m else 0)


def zeros(rows: int, cols: int) -> list:
    return [[Q(0)] * cols for _ in range(rows)]


def identity(n: int) -> list:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Q(1)
    return m


def transpose(m: Sequence[Sequence]) -> list:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col) if x and y), Q(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v) if x and y), Q(0)) for row in a]


def evaluate_jets(m: Sequence[Sequence[Jet]]) -> list:
    """Constant terms of a jet matrix."""
    return [[x.value for x in row] for row in m]


# -- rationals ---------------------------------------------------------------

def _integer_row(row: Sequence) -> list:
    den = 1
    for x in row:
        if x:
            den = gmpy2.lcm(den, x.denominator)
    return [gmpy2.mpz(x.numerator) * (den // x.denominator) if x else gmpy2.mpz(0) for x in row]


def rank(m: Sequence[Sequence]) -> int:
    """Exact rank by fraction-free (Bareiss) elimination on cleared rows."""
    rows = [_integer_row(r) for r in m if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    prev = gmpy2.mpz(1)
    r = 0
    for c in range(ncols):
        best = None
        for i in range(r, len(rows)):
            v = rows[i][c]
            if v:
                size = v.bit_length()
                if best is None or size < best[0]:
                    best = (size, i)
        if best is None:
            continue
        i = best[1]
        rows[r], rows[i] = rows[i], rows[r]
        piv_row = rows[r]
        p = piv_row[c]
        for i in range(r + 1, len(rows)):
            row = rows[i]
            a = row[c]
            if a:
                for k in range(c + 1, ncols):
                    row[k] = (p * row[k] - a * piv_row[k]) // prev
            else:
                for k in range(c + 1, ncols):
                    if row[k]:
                        row[k] = (p * row[k]) // prev
            row[c] = gmpy2.mpz(0)
        prev = p
        r += 1
        if r == len(rows):
            break
    return r


def rref(m: Sequence[Sequence]) -> tuple:
    """Reduced row echelon form. Returns (rows, pivot_columns)."""
    rows = [list(r) for r in m]
    nrows, ncols = shape(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        best = None
        for i in range(r, nrows):
            v = rows[i][c]
            if v:
                size = bit_size(v)
                if best is None or size < best[0]:
                    best = (size, i)
        if best is None:
            continue
        i = best[1]
        rows[r], rows[i] = rows[i], rows[r]
        inv = 1 / rows[r][c]
        piv = [x * inv if x else x for x in rows[r]]
        rows[r] = piv
        nz = [k for k in range(ncols) if piv[k]]
        for i in range(nrows):
            if i != r:
                row = rows[i]
                f = row[c]
                if f:
                    for k in nz:
                        row[k] = row[k] - f * piv[k]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def kernel_basis(m: Sequence[Sequence]) -> list:
    """Basis of the right null space; one vector per free column."""
    nrows, ncols = shape(m)
    if nrows == 0:
        return [[Q(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    rows, pivots = rref(m)
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [Q(0)] * ncols
        v[f] = Q(1)
        for r, c in enumerate(pivots):
            v[c] = -rows[r][f]
        basis.append(v)
    return basis


def independent_rows(m: Sequence[Sequence], limit: int | None = None) -> list:
    """Greedy: first rows (in index order) that increase the rank."""
    chosen = []
    echelon = []  # (pivot column, normalized row)
    for i, row in enumerate(m):
        v = list(row)
        for c, e in echelon:
            f = v[c]
            if f:
                v = [x - f * y for x, y in zip(v, e)]
        lead = next((c for c, x in enumerate(v) if x), None)
        if lead is None:
            continue
        inv = 1 / v[lead]
        echelon.append((lead, [x * inv for x in v]))
        chosen.append(i)
        if limit is not None and len(chosen) == limit:
            break
    return chosen


def inverse(m: Sequence[Sequence]) -> list:
    n = len(m)
    aug = [list(row) + [Q(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise RankDeficientError("matrix is singular")
    return [row[n:] for row in rows[:n]]


def determinant(m: Sequence[Sequence]):
    n = len(m)
    rows = [list(r) for r in m]
    det = Q(1)
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c]), None)
        if p is None:
            return Q(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        piv = rows[c][c]
        det *= piv
        for i in range(c + 1, n):
            f = rows[i][c] / piv
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return det


def solve_pivoted(m: Sequence[Sequence], rhs: Sequence) -> tuple:
    """Solve using the first invertible cols x cols row submatrix.

    Returns ``(solution, pivot_rows)``. Rows outside ``pivot_rows`` are not
    checked; callers form their compatibility residuals.
    """
    nrows, ncols = shape(m)
    chosen = independent_rows(m, limit=ncols)
    if len(chosen) < ncols:
        raise RankDeficientError(f"rank {len(chosen)} < {ncols} columns")
    aug = [list(m[i]) + [rhs[i]] for i in chosen]
    rows, pivots = rref(aug)
    return [rows[k][ncols] for k in range(ncols)], chosen


def generalized_inverse(p: Sequence[Sequence]) -> list:
    """Left inverse ``(P^T P)^{-1} P^T`` of a full-column-rank matrix."""
    pt = transpose(p)
    try:
        gram_inv = inverse(matmul(pt, p))
    except RankDeficientError as exc:
        raise RankDeficientError("P^T P is singular: column rank deficient") from exc
    return matmul(gram_inv, pt)


# -- jets ----------------------------------------------------------------------

def _jet_eliminate(rows: list, pivot_cols: int, steps: int) -> list:
    """Gauss-Jordan with unit pivots over the truncated series ring.

    Pivots are searched among the first ``pivot_cols`` columns; the pivot
    with the smallest constant-term bit size wins, ties broken row-major.
    Mutates ``rows``; returns the list of (row, column) pivots.
    """
    used_rows, used_cols = set(), set()
    pivots = []
    width = len(rows[0]) if rows else 0
    for _ in range(steps):
        best = None
        for i, row in enumerate(rows):
            if i in used_rows:
                continue
            for c in range(pivot_cols):
                if c in used_cols:
                    continue
                v = row[c].value
                if v:
                    size = bit_size(v)
                    if best is None or size < best[0]:
                        best = (size, i, c)
        if best is None:
            raise RankDropError("no unit pivot left: rank at base point is below the expected rank")
        _, i, c = best
        inv = rows[i][c].reciprocal()
        piv = [x * inv if not x.is_zero() else x for x in rows[i]]
        rows[i] = piv
        nz = [k for k in range(width) if not piv[k].is_zero()]
        for k, row in enumerate(rows):
            if k == i:
                continue
            f = row[c]
            if f.is_zero():
                continue
            for t in nz:
                row[t] = row[t] - f * piv[t]
        used_rows.add(i)
        used_cols.add(c)
        pivots.append((i, c))
    return pivots


def jet_kernel_frame(m: Sequence[Sequence[Jet]], expected_rank: int) -> list:
    """Jet vectors spanning the kernel of ``m`` near its base point.

    The constant-term matrix must have rank ``expected_rank``; if any entry
    survives elimination the rank is not constant near the base point and
    ``RankDropError`` is raised.
    """
    rows = [list(r) for r in m]
    if not rows:
        raise LinAlgError("empty matrix")
    ncols = len(rows[0])
    sample = rows[0][0]
    pivots = _jet_eliminate(rows, ncols, expected_rank)
    pivot_rows = {i for i, _ in pivots}
    for i, row in enumerate(rows):
        if i not in pivot_rows and any(not x.is_zero() for x in row):
            raise RankDropError("matrix rank is not constant near the base point")
    pivot_cols = {c for _, c in pivots}
    one = Jet.constant(1, sample.base, sample.order)
    zero = Jet.constant(0, sample.base, sample.order)
    frame = []
    for f in range(ncols):
        if f in pivot_cols:
            continue
        v = [zero] * ncols
        v[f] = one
        for i, c in pivots:
            v[c] = -rows[i][f]
        frame.append(v)
    return frame


def jet_solve(m: Sequence[Sequence[Jet]], rhs: Sequence[Jet]) -> list:
    """Unique solution of ``m x = rhs`` for a full-column-rank jet matrix.

    Every equation is verified: a nonzero residual on the rows outside the
    pivot set raises ``InconsistentSystemError``.
    """
    ncols = len(m[0])
    rows = [list(r) + [b] for r, b in zip(m, rhs)]
    try:
        pivots = _jet_eliminate(rows, ncols, ncols)
    except RankDropError as exc:
        raise RankDeficientError("jet matrix is not of full column rank at base") from exc
    pivot_rows = {i for i, _ in pivots}
    for i, row in enumerate(rows):
        if i not in pivot_rows and any(not x.is_zero() for x in row):
            raise InconsistentSystemError("right-hand side is not in the column span")
    x = [None] * ncols
    for i, c in pivots:
        x[c] = rows[i][ncols]
    return x


def jet_matvec(m: Sequence[Sequence[Jet]], v: Sequence[Jet]) -> list:
    out = []
    for row in m:
        acc = None
        for a, b in zip(row, v):
            if a.is_zero() or b.is_zero():
                continue
            t = a * b
            acc = t if acc is None else acc + t
        if acc is None:
            acc = Jet.constant(0, v[0].base, min(row[0].order, v[0].order))
        out.append(acc)
    return out
