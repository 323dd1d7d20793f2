from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhf import symexpr as sx
from polyhf.polyring import (
    Polynomial,
    UsageError,
    VarTable,
    differentiate,
    evaluate,
    format_polynomial,
    grevlex,
    lex,
    parse_polynomial,
    substitute,
)

VT = VarTable(("x", "y", "z"))


def P(text):
    return parse_polynomial(text, VT)


def test_arithmetic_examples():
    assert P("x+y") * P("x-y") == P("x^2-y^2")
    assert (P("x+1")) ** 3 == P("x^3+3*x^2+3*x+1")
    assert P("x") - P("x") == Polynomial.zero(VT)
    assert P("2*x*y") / 2 == P("x*y")


def test_mismatched_tables_rejected():
    other = parse_polynomial("x", VarTable(("x",)))
    with pytest.raises(UsageError):
        P("x") + other


def test_differentiate_and_substitute():
    p = P("x^3*y - 2*y*z + 5")
    assert differentiate(p, "x") == P("3*x^2*y")
    assert differentiate(p, "z") == P("-2*y")
    assert substitute(p, {"y": P("x+1")}) == P("x^4+x^3-2*x*z-2*z+5")
    assert substitute(p, {"z": Fraction(1, 2)}) == P("x^3*y - y + 5")


def test_evaluate_exact():
    assert evaluate(P("x^2*y - z/3"), {"x": 2, "y": Fraction(1, 4), "z": 3}) == 0


def test_taylor_examples():
    r = sx.var("r")
    vt = VarTable(("r",))
    assert sx.taylor_polynomial(sx.exp(-r), "r", 0, 2, var_table=vt) == parse_polynomial("1-r+r^2/2", vt)
    assert sx.taylor_polynomial(1 / r, "r", 1, 2, var_table=vt) == parse_polynomial("3-3*r+r^2", vt)


def test_orders_compare_examples():
    gl = grevlex("x", "y", "z")
    lx = lex("x", "y", "z")
    assert lx.compare((1, 0, 0), (0, 5, 5)) > 0
    assert gl.compare((1, 0, 0), (0, 5, 5)) < 0
    assert gl.compare((1, 1, 0), (1, 0, 1)) > 0


def test_format_parse_round_trip():
    p = P("-3/7*x^2*y + z^4 - 1")
    assert parse_polynomial(format_polynomial(p), VT) == p


exps = st.tuples(*(st.integers(0, 3) for _ in range(3)))
coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=9)
polys = st.dictionaries(exps, coeffs, max_size=5).map(lambda d: Polynomial(VT, d))
points = st.fixed_dictionaries({n: st.fractions(min_value=-3, max_value=3, max_denominator=5) for n in "xyz"})


@settings(max_examples=60)
@given(polys, polys, points)
def test_ring_homomorphism(p, q, pt):
    assert evaluate(p * q, pt) == evaluate(p, pt) * evaluate(q, pt)
    assert evaluate(p + q, pt) == evaluate(p, pt) + evaluate(q, pt)


@settings(max_examples=60)
@given(polys, polys)
def test_product_rule(p, q):
    for n in "xyz":
        assert differentiate(p * q, n) == differentiate(p, n) * q + p * differentiate(q, n)


@settings(max_examples=60)
@given(polys, polys, points)
def test_evaluate_after_substitute(p, q, pt):
    assert evaluate(substitute(p, {"x": q}), pt) == evaluate(p, dict(pt, x=evaluate(q, pt)))


@given(exps, exps, exps)
def test_orders_are_monomial_orders(a, b, c):
    for order in (lex("x", "y", "z"), grevlex("x", "y", "z")):
        ac = tuple(i + k for i, k in zip(a, c))
        bc = tuple(i + k for i, k in zip(b, c))
        assert order.compare(a, b) == -order.compare(b, a)
        assert order.compare(a, b) == order.compare(ac, bc)
        assert order.compare(ac, (0, 0, 0)) >= 0


@given(polys)
def test_round_trip_property(p):
    assert parse_polynomial(format_polynomial(p), VT) == p
