"""Matrix permanents (the signless determinant) and the block permanent of G^{alpha,beta}.

Entries may come from any commutative ring whose elements support ``+``,
``-`` and ``*`` with each other and with Python integers (HRational,
ChartFunction, Fraction, int).
"""
from __future__ import annotations

from itertools import combinations, permutations
from typing import Any, Sequence

from .algebra import ONE
from .multiindex import is_valid, weight

DEFAULT_BOUND = 12
NAIVE_LIMIT = 6


class PermanentError(ValueError):
    pass


def _check_square(C: Sequence[Sequence]) -> int:
    n = len(C)
    if any(len(row) != n for row in C):
        raise PermanentError("permanent needs a square matrix")
    return n


def _sum(terms, one):
    acc = None
    for t in terms:
        acc = t if acc is None else acc + t
    return one * 0 if acc is None else acc


def permanent_naive(C: Sequence[Sequence], one: Any = ONE):
    n = _check_square(C)
    if n == 0:
        return one

    def prods():
        for sigma in permutations(range(n)):
            p = one
            for k in range(n):
                x = C[k][sigma[k]]
                if not x:
                    break
                p = p * x
            else:
                yield p

    return _sum(prods(), one)


def permanent_ryser(C: Sequence[Sequence], one: Any = ONE):
    """Inclusion-exclusion over column subsets: (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} C_ij."""
    n = _check_square(C)
    if n == 0:
        return one
    total = one * 0
    for size in range(1, n + 1):
        sign = -1 if (n - size) % 2 else 1
        for cols in combinations(range(n), size):
            p = one
            for i in range(n):
                rs = _sum((C[i][j] for j in cols), one)
                if not rs:
                    p = None
                    break
                p = p * rs
            if p is not None:
                total = total + p if sign > 0 else total - p
    return total


def plus_det(C: Sequence[Sequence], bound: int = DEFAULT_BOUND, one: Any = ONE):
    """|C|^+ = sum over permutations sigma of prod_k C[k][sigma(k)]."""
    n = _check_square(C)
    if n > bound:
        raise PermanentError(f"{n}x{n} exceeds the permanent size bound {bound}")
    if n <= NAIVE_LIMIT:
        return permanent_naive(C, one)
    return permanent_ryser(C, one)


def minor(C: Sequence[Sequence], row: int, col: int) -> list[list]:
    return [[x for j, x in enumerate(r) if j != col] for i, r in enumerate(C) if i != row]


def plus_det_expand(C: Sequence[Sequence], row: int, bound: int = DEFAULT_BOUND, one: Any = ONE):
    """Expansion along ``row`` (0-based); every cofactor enters with a plus sign."""
    n = _check_square(C)
    if not 0 <= row < n:
        raise PermanentError(f"row {row} outside 0..{n - 1}")
    return _sum(
        (C[row][j] * plus_det(minor(C, row, j), bound, one) for j in range(n) if C[row][j]),
        one,
    )


def block_matrix(alpha: Sequence[int], beta: Sequence[int], g: Sequence[Sequence]) -> list[list]:
    """Dense G^{alpha,beta}: block (p, q) has shape alpha_p x beta_q and constant value g[p][q]."""
    if weight(alpha) != weight(beta):
        raise PermanentError("row and column weights differ")
    rows = [p for p, a in enumerate(alpha) for _ in range(a)]
    cols = [q for q, b in enumerate(beta) for _ in range(b)]
    return [[g[p][q] for q in cols] for p in rows]


def block_permanent(alpha: Sequence[int], beta: Sequence[int], g: Sequence[Sequence], one: Any = ONE, memo: dict | None = None):
    """|G^{alpha,beta}|^+ by expanding along a row of the first nonempty row block.

    All columns of block J give the same minor, so
    |G^{a,b}|^+ = sum_J b_J g[I][J] |G^{a-e_I, b-e_J}|^+.
    ``memo`` may be shared across calls with the same ``g``.
    """
    alpha, beta = tuple(alpha), tuple(beta)
    if len(alpha) != len(beta):
        raise PermanentError("multi-indices have different lengths")
    if weight(alpha) != weight(beta):
        raise PermanentError("row and column weights differ")
    if not (is_valid(alpha) and is_valid(beta)):
        return one * 0
    if memo is None:
        memo = {}
    return _block(alpha, beta, g, one, memo)


def _block(alpha, beta, g, one, memo):
    key = (alpha, beta)
    if key in memo:
        return memo[key]
    I = next((k for k, a in enumerate(alpha) if a), None)
    if I is None:
        return one
    a2 = alpha[:I] + (alpha[I] - 1,) + alpha[I + 1:]
    terms = []
    for J, b in enumerate(beta):
        if b == 0 or not g[I][J]:
            continue
        b2 = beta[:J] + (b - 1,) + beta[J + 1:]
        terms.append(g[I][J] * b * _block(a2, b2, g, one, memo))
    out = _sum(terms, one)
    memo[key] = out
    return out
