"""Multi-indices: integer N-vectors recording derivative multiplicities.

Negative components are representable; such an index is *invalid* and any
coefficient or operator labelled by it is zero.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

MultiIndex = tuple  # tuple[int, ...]


def multi_index(components: Iterable[int]) -> MultiIndex:
    return tuple(int(c) for c in components)


def unit(N: int, k: int) -> MultiIndex:
    """The unit vector e_k, with coordinate labels 1..N."""
    if not 1 <= k <= N:
        raise ValueError(f"coordinate {k} outside 1..{N}")
    return tuple(1 if j == k - 1 else 0 for j in range(N))


def zero(N: int) -> MultiIndex:
    return (0,) * N


def weight(a: Sequence[int]) -> int:
    return sum(a)


def is_valid(a: Sequence[int]) -> bool:
    return all(c >= 0 for c in a)


@lru_cache(maxsize=None)
def enumerate_weight(N: int, n: int) -> tuple[MultiIndex, ...]:
    """All non-negative N-component indices of weight n, lexicographically ascending."""
    if N < 1:
        raise ValueError("N must be positive")
    if n < 0:
        raise ValueError("weight must be non-negative")

    def build(parts: int, total: int):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in build(parts - 1, total - head):
                yield (head,) + tail

    return tuple(build(N, n))


def shift(a: Sequence[int], deltas: Iterable[tuple[int, int]]) -> MultiIndex:
    """Add ``sign * e_coord`` for each ``(coord, sign)``; coordinates are 1-based.

    The result may be invalid; check with :func:`is_valid`.
    """
    out = list(a)
    N = len(out)
    for coord, sign in deltas:
        if not 1 <= coord <= N:
            raise ValueError(f"coordinate {coord} outside 1..{N}")
        out[coord - 1] += sign
    return tuple(out)


def add(a: Sequence[int], b: Sequence[int]) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[int], b: Sequence[int]) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def factorial_product(a: Sequence[int]) -> Fraction:
    """prod_k a_k!  (as an exact rational)."""
    if not is_valid(a):
        raise ValueError(f"factorial of invalid multi-index {tuple(a)}")
    out = 1
    for c in a:
        out *= factorial(c)
    return Fraction(out)


def from_sequence(N: int, seq: Iterable[int]) -> MultiIndex:
    """Count occurrences of 1-based coordinate labels: (1, 1, 2) -> (2, 1)."""
    out = [0] * N
    for k in seq:
        out[k - 1] += 1
    return tuple(out)
