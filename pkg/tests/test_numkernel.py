from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyhf.numkernel import (
    DomainError,
    as_fraction,
    format_bigfloat,
    format_rational,
    parse_bigfloat,
    parse_rational,
    rationalize,
    to_bigfloat,
)


def test_rationalize_nearest_examples():
    assert rationalize(Fraction(12346, 10000), Fraction(1, 1000)) == Fraction(247, 200)
    assert rationalize(Fraction(4, 10000), Fraction(1, 1000)) == 0
    assert rationalize(Fraction(-62075494, 10 ** 8), Fraction(1, 100000)) == Fraction(-2483, 4000)


def test_rationalize_truncate_rounds_toward_zero():
    assert rationalize(Fraction(12346, 10000), Fraction(1, 1000), "truncate") == Fraction(1234, 1000)
    assert rationalize(Fraction(-12346, 10000), Fraction(1, 1000), "truncate") == Fraction(-1234, 1000)


def test_rationalize_rejects_bad_grid_and_mode():
    with pytest.raises(ValueError):
        rationalize(1, 0)
    with pytest.raises(ValueError):
        rationalize(1, Fraction(1, 10), "banker")


def test_to_bigfloat_matches_exact_division():
    with mpmath.workprec(256):
        x = to_bigfloat(Fraction(1, 3), 256)
        assert abs(x - mpmath.mpf(1) / 3) < mpmath.mpf(2) ** -250
    assert float(to_bigfloat(Fraction(7, 5), 64)) == 1.4
    with pytest.raises(ValueError):
        to_bigfloat(Fraction(1, 3), 32)


def test_bigfloat_text_round_trip():
    x = to_bigfloat(Fraction(2, 7), 200)
    y, bits = parse_bigfloat(format_bigfloat(x, 200))
    assert bits >= 53
    with mpmath.workprec(200):
        assert abs(x - y) < mpmath.mpf(10) ** -50


def test_rational_text_round_trip():
    for q in (Fraction(0), Fraction(-3, 7), Fraction(5), Fraction(247, 200)):
        assert parse_rational(format_rational(q)) == q
    assert parse_rational("1.25") == Fraction(5, 4)


def test_as_fraction_rejects_non_finite():
    with pytest.raises((DomainError, ValueError)):
        as_fraction(float("nan"))


grids = st.sampled_from([Fraction(1, 10), Fraction(1, 1000), Fraction(1, 100000), Fraction(3, 7)])
values = st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6)


@given(values, grids)
def test_rationalize_lands_on_grid_within_half_step(x, g):
    q = rationalize(x, g)
    assert (q / g).denominator == 1
    assert abs(q - x) <= g / 2


@given(values, grids)
def test_truncate_never_grows_magnitude(x, g):
    q = rationalize(x, g, "truncate")
    assert (q / g).denominator == 1
    assert abs(q) <= abs(x) and abs(x - q) < g


@given(values, grids)
def test_rationalize_is_idempotent_and_odd(x, g):
    q = rationalize(x, g)
    assert rationalize(q, g) == q
    assert rationalize(-x, g) == -q
