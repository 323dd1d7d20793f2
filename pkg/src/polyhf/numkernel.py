"""Exact rationals, extended-precision floats and coefficient rationalization.

Rationals are :class:`fractions.Fraction` (always in lowest terms with a
positive denominator).  Extended-precision floats are :mod:`mpmath` ``mpf``
values; every function that produces one takes an explicit ``precision_bits``
and evaluates under :func:`mpmath.workprec` so no global state leaks.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational as _RationalABC

import mpmath
from mpmath import libmp

DEFAULT_PRECISION_BITS = 256
DEFAULT_GRID = Fraction(1, 1000)
MIN_PRECISION_BITS = 64

ROUNDING_MODES = ("nearest", "truncate")


class DomainError(ValueError):
    """Raised when a numeric operation is asked to work outside its domain."""


def as_fraction(x) -> Fraction:
    """Convert an int, Fraction, decimal/ratio string or ``mpf`` exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, _RationalABC):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            raise DomainError(f"non-finite value {x}")
        sign, man, exp, _ = x._mpf_
        if man == 0:
            return Fraction(0)
        val = Fraction(man) * (Fraction(2) ** exp)
        return -val if sign else val
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"non-finite value {x}")
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, an integer or a finite decimal literal exactly."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_rational(q: Fraction) -> str:
    q = as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _check_bits(precision_bits: int) -> None:
    if precision_bits < MIN_PRECISION_BITS:
        raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}, got {precision_bits}")


def to_bigfloat(q, precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.mpf:
    """Correctly rounded (round-half-even) conversion of a rational."""
    _check_bits(precision_bits)
    q = as_fraction(q)
    raw = libmp.from_rational(q.numerator, q.denominator, precision_bits, libmp.round_nearest)
    # construct inside the context, or mpf() would round to the ambient precision
    with mpmath.workprec(precision_bits):
        return mpmath.mpf(raw)


def format_bigfloat(x, precision_bits: int = DEFAULT_PRECISION_BITS, digits: int | None = None) -> str:
    """Decimal rendering annotated with the binary precision, e.g. ``1.4@256``."""
    if digits is None:
        digits = max(1, int(precision_bits * 0.30103) - 2)
    with mpmath.workprec(precision_bits):
        body = mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=True, min_fixed=-math.inf, max_fixed=math.inf)
    return f"{body}@{precision_bits}"


def parse_bigfloat(text: str) -> tuple[mpmath.mpf, int]:
    body, _, bits = text.partition("@")
    precision_bits = int(bits) if bits else DEFAULT_PRECISION_BITS
    with mpmath.workprec(precision_bits):
        return mpmath.mpf(body), precision_bits


def rationalize(x, grid=DEFAULT_GRID, mode: str = "nearest") -> Fraction:
    """Snap ``x`` onto the lattice ``grid * Z``.

    ``mode="nearest"`` rounds to the closest lattice point with ties away from
    zero; ``mode="truncate"`` drops the fractional part (rounds toward zero).
    """
    grid = as_fraction(grid)
    if grid <= 0:
        raise ValueError("grid must be positive")
    if mode not in ROUNDING_MODES:
        raise ValueError(f"unknown rounding mode {mode!r}")
    y = as_fraction(x) / grid
    mag = abs(y)
    if mode == "nearest":
        n = math.floor(mag + Fraction(1, 2))
    else:
        n = math.floor(mag)
    if y < 0:
        n = -n
    return n * grid
