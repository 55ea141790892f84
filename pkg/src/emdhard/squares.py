"""Writing an integer as a short sum of perfect squares.

``decompose_squares`` runs a greedy phase (largest square not exceeding the
remainder) until the remainder drops to ``max(ceil(m**(rho/2)), 16)``, then
finishes the remainder with a minimal decomposition found by dynamic
programming over ``0..remainder``; Lagrange's theorem caps that part at four
squares.

Parts-count bound.  Each greedy step maps a remainder ``r`` to at most
``2*isqrt(r) <= 2*sqrt(r)``, so after ``j`` steps the remainder is at most
``4 * (m/4)**(2**-j)``.  That is below the stop threshold once
``2**j >= 4/rho``, hence the greedy phase emits at most
``ceil(log2(1/rho)) + 2`` squares and the whole decomposition at most
``ceil(log2(1/rho)) + 6`` (``parts_bound``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .errors import CapacityError, ParameterError
from .numeric import RationalLike, as_fraction, ceil_pow

DP_FLOOR = 16
MIN_SQUARE_COUNT_CAP = 10**7


@dataclass(frozen=True)
class SquareDecomposition:
    parts: tuple[int, ...]
    target: int
    rho: Fraction

    def __post_init__(self):
        if sum(p * p for p in self.parts) != self.target:
            raise ValueError("parts do not square-sum to the target")
        if any(p <= 0 for p in self.parts):
            raise ValueError("parts must be positive")

    def __len__(self) -> int:
        return len(self.parts)


def _check_rho(rho) -> Fraction:
    r = as_fraction(rho)
    if not 0 < r <= 1:
        raise ParameterError(f"rho must lie in (0, 1], got {rho}")
    return r


def parts_bound(rho: RationalLike) -> int:
    """Proven upper bound on ``len(decompose_squares(m, rho))`` for every m."""
    r = _check_rho(rho)
    inv = 1 / r
    log2_ceil = 0
    while Fraction(2) ** log2_ceil < inv:
        log2_ceil += 1
    return log2_ceil + 6


def greedy_threshold(m: int, rho: RationalLike) -> int:
    """Remainder size at which the greedy phase hands over to the DP."""
    r = _check_rho(rho)
    if m < 1:
        return DP_FLOOR
    e = r / 2
    # ceil(m**e) <= DP_FLOOR  iff  m**p <= DP_FLOOR**q  for e = p/q
    if m**e.numerator <= DP_FLOOR**e.denominator:
        return DP_FLOOR
    return max(ceil_pow(m, e), DP_FLOOR)


def _min_squares_dp(r: int) -> tuple[int, ...]:
    """Minimal list of positive integers whose squares sum to ``r``."""
    best = [0] * (r + 1)
    last = [0] * (r + 1)
    for x in range(1, r + 1):
        bc, bs = x + 1, 1
        s = 1
        while s * s <= x:
            c = best[x - s * s] + 1
            if c < bc:
                bc, bs = c, s
            s += 1
        best[x] = bc
        last[x] = bs
    out = []
    while r:
        out.append(last[r])
        r -= last[r] * last[r]
    return tuple(out)


def decompose_squares(m: int, rho: RationalLike) -> SquareDecomposition:
    """Decompose ``m`` into few squares; parts are returned in descending order.

    The closing DP runs on a remainder near ``m**(rho/2)``, so large ``rho``
    together with huge ``m`` is expensive.

    >>> decompose_squares(12, Fraction(1, 16)).parts
    (2, 2, 2)
    """
    r = _check_rho(rho)
    if m < 0:
        raise ParameterError("cannot decompose a negative integer")
    if m == 0:
        return SquareDecomposition((), 0, r)
    stop = greedy_threshold(m, r)
    parts = []
    rem = m
    while rem > stop:
        s = isqrt(rem)
        parts.append(s)
        rem -= s * s
    parts.extend(_min_squares_dp(rem))
    parts.sort(reverse=True)
    return SquareDecomposition(tuple(parts), m, r)


def min_square_count(m: int) -> int:
    """Least number of positive squares summing to ``m`` (``1 <= m <= 10**7``).

    Breadth-first over the count: one square, then two (scan ``i**2``), then
    three (scan ``i**2`` and test the rest for two squares, vectorised);
    otherwise four.  No number-theoretic shortcut is used, so this serves as
    an independent oracle.
    """
    if m < 1:
        raise ParameterError("min_square_count needs m >= 1")
    if m > MIN_SQUARE_COUNT_CAP:
        raise CapacityError(f"min_square_count is capped at {MIN_SQUARE_COUNT_CAP}")
    if isqrt(m) ** 2 == m:
        return 1
    if _is_two_squares(m):
        return 2
    root = isqrt(m)
    for i in range(1, root + 1):
        if _is_two_squares(m - i * i):
            return 3
    return 4


def _is_two_squares(x: int) -> bool:
    if x < 0:
        return False
    i = np.arange(0, isqrt(x) + 1, dtype=np.int64)
    rest = x - i * i
    r = np.sqrt(rest.astype(np.float64)).astype(np.int64)
    # fix float rounding around perfect squares
    r += (r + 1) * (r + 1) <= rest
    r -= r * r > rest
    return bool(np.any(r * r == rest))
