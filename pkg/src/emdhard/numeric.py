"""Exact integer helpers for fractional powers.

Every size the algorithms derive from ``n**alpha``-style expressions is
rounded up, and the rounding is done in integer arithmetic so that results
never depend on floating-point behaviour.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

from .errors import ParameterError

RationalLike = int | str | Fraction


def as_fraction(x: RationalLike | float) -> Fraction:
    """Parse ``"1/2"``, ``"0.7"``, ints, floats and Fractions."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"not a rational number: {x!r}") from exc


def iroot(x: int, q: int) -> int:
    """Floor of the q-th root of a non-negative integer."""
    if x < 0 or q < 1:
        raise ParameterError("iroot needs x >= 0 and q >= 1")
    if x < 2 or q == 1:
        return x
    if q == 2:
        return isqrt(x)
    # Newton iteration from an overestimate
    r = 1 << -(-x.bit_length() // q)
    while True:
        nxt = ((q - 1) * r + x // r ** (q - 1)) // q
        if nxt >= r:
            break
        r = nxt
    while r**q > x:
        r -= 1
    while (r + 1) ** q <= x:
        r += 1
    return r


def ceil_pow(n: int, exponent: RationalLike, coef: RationalLike = 1) -> int:
    """Return ``ceil(coef * n**exponent)`` exactly, for ``n >= 1``.

    >>> ceil_pow(8, Fraction(1, 2), 2)
    6
    >>> ceil_pow(16, 1, 2)
    32
    """
    e = as_fraction(exponent)
    c = as_fraction(coef)
    if n < 1:
        raise ParameterError("ceil_pow needs n >= 1")
    if c < 0:
        raise ParameterError("ceil_pow needs a non-negative coefficient")
    if c == 0:
        return 0
    p, q = e.numerator, e.denominator
    # target x = (c**q * n**p)**(1/q); find least m with m**q >= target**q
    if p >= 0:
        num = c.numerator**q * n**p
        den = c.denominator**q
    else:
        num = c.numerator**q
        den = c.denominator**q * n ** (-p)
    m = iroot(num // den, q)
    while m**q * den < num:
        m += 1
    while m > 0 and (m - 1) ** q * den >= num:
        m -= 1
    return m


def ceil_sqrt(x: RationalLike) -> int:
    """``ceil(sqrt(x))`` for a non-negative rational."""
    f = as_fraction(x)
    if f < 0:
        raise ParameterError("ceil_sqrt of a negative number")
    m = isqrt(f.numerator // f.denominator)
    while m * m * f.denominator < f.numerator:
        m += 1
    return m


def ceil_log2(n: int) -> int:
    """``ceil(log2(n))`` for ``n >= 1``."""
    if n < 1:
        raise ParameterError("ceil_log2 needs n >= 1")
    return (n - 1).bit_length()
