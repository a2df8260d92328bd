"""Exact Gauss-Jordan elimination over Q(hbar)."""
from __future__ import annotations

from typing import Sequence

from .algebra import ONE, ZERO, HRational


class LinearSystemError(ArithmeticError):
    pass


class InconsistentSystem(LinearSystemError):
    def __init__(self, message: str, rows: Sequence[int] = ()):
        super().__init__(message)
        self.rows = list(rows)


class RankDeficient(LinearSystemError):
    def __init__(self, message: str, free: int):
        super().__init__(message)
        self.free = free


class SingularMatrix(LinearSystemError):
    pass


def _cost(x: HRational) -> int:
    return x.num.degree + x.den.degree + sum(c.numerator.bit_length() + c.denominator.bit_length() for c in x.num.coeffs)


def _eliminate(rows: list[list[HRational]], ncols: int) -> list[tuple[int, int]]:
    """In-place reduced row echelon form on the first ``ncols`` columns.

    Returns the (row, column) pivot positions.  Pivots are chosen by the
    simplest nonzero entry so that intermediate expressions stay small.
    """
    pivots: list[tuple[int, int]] = []
    used = [False] * len(rows)
    for col in range(ncols):
        best = None
        for r, row in enumerate(rows):
            if used[r] or row[col].is_zero():
                continue
            c = _cost(row[col])
            if best is None or c < best[0]:
                best = (c, r)
                if c == 0:
                    break
        if best is None:
            continue
        r = best[1]
        used[r] = True
        prow = rows[r]
        inv = prow[col].inverse()
        if inv != ONE:
            prow[:] = [x * inv if not x.is_zero() else x for x in prow]
        for rr, row in enumerate(rows):
            if rr == r:
                continue
            f = row[col]
            if f.is_zero():
                continue
            row[:] = [a - f * b if not b.is_zero() else a for a, b in zip(row, prow)]
        pivots.append((r, col))
    return pivots


def solve_exact(rows: Sequence[Sequence], nunknowns: int) -> list[HRational]:
    """Solve an (over)determined system given as augmented rows ``[a_1..a_n | b]``.

    The solution must be unique; every equation not used as a pivot is
    checked to hold exactly.
    """
    work = [[HRational.coerce(x) for x in row] for row in rows]
    for row in work:
        if len(row) != nunknowns + 1:
            raise ValueError("augmented row has the wrong length")
    pivots = _eliminate(work, nunknowns)
    pivot_rows = {r for r, _ in pivots}
    bad = [r for r, row in enumerate(work) if r not in pivot_rows and not row[-1].is_zero()]
    if bad:
        raise InconsistentSystem(f"{len(bad)} equation(s) contradict the rest", bad)
    if len(pivots) < nunknowns:
        free = nunknowns - len(pivots)
        raise RankDeficient(f"system leaves {free} unknown(s) undetermined", free)
    sol = [ZERO] * nunknowns
    for r, c in pivots:
        sol[c] = work[r][-1]
    return sol


def identity(n: int) -> list[list[HRational]]:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = ZERO
            for k in range(m):
                x, y = a[i][k], b[k][j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def inverse(matrix: Sequence[Sequence]) -> list[list[HRational]]:
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    work = [[HRational.coerce(x) for x in row] + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(matrix)]
    pivots = _eliminate(work, n)
    if len(pivots) < n:
        raise SingularMatrix(f"matrix has rank {len(pivots)} < {n}")
    out = [None] * n
    for r, c in pivots:
        out[c] = work[r][n:]
    return out
