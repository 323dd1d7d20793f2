from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhf import univariate as up
from polyhf.polyring import VarTable, parse_polynomial
from polyhf.rootsolve import isolate_real_roots, refine_root, solve_chain
from polyhf.triangular import TriangularSet


def test_sqrt_two():
    ivs = isolate_real_roots([Fraction(-2), 0, 1])
    assert len(ivs) == 2
    roots = sorted(refine_root(iv, Fraction(1, 10 ** 40)) for iv in ivs)
    with mpmath.workprec(200):
        assert abs(roots[1] - mpmath.sqrt(2)) < mpmath.mpf(10) ** -35
        assert abs(roots[0] + mpmath.sqrt(2)) < mpmath.mpf(10) ** -35


def test_no_real_roots():
    assert isolate_real_roots([1, 0, 1]) == []
    assert up.complex_root_count([Fraction(1), 0, 1]) == 2


def test_linear_root_is_exact():
    (iv,) = isolate_real_roots([-7, 5])
    with mpmath.workprec(256):
        assert abs(refine_root(iv) - mpmath.mpf(7) / 5) < mpmath.mpf(10) ** -25
    assert up.rational_roots([Fraction(-7), Fraction(5)]) == [Fraction(7, 5)]


def test_multiple_roots_counted_once():
    p = up.mul(up.mul([Fraction(-1), 1], [Fraction(-1), 1]), [Fraction(2), 1])
    assert len(isolate_real_roots(p)) == 2


def test_chain_back_substitution():
    vt = VarTable(("y", "x"))
    ts = TriangularSet([parse_polynomial("x^2-1", vt), parse_polynomial("y-x", vt)], ("x", "y"), vt)
    branches, report = solve_chain(ts)
    pts = sorted((float(b["x"]), float(b["y"])) for b in branches)
    assert pts == [(-1.0, -1.0), (1.0, 1.0)]
    assert report.real == 2 and report.complex_branches == 0


def test_chain_counts_complex_branches():
    vt = VarTable(("y", "x"))
    ts = TriangularSet([parse_polynomial("x^2-4", vt), parse_polynomial("y^2-x", vt)], ("x", "y"), vt)
    branches, report = solve_chain(ts)
    assert report.real == 2 and report.complex_branches == 2
    assert all(float(b["x"]) == 2.0 for b in branches)


roots_st = st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=7), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(roots_st, st.integers(0, 2))
def test_isolation_is_sound(roots, extra):
    p = [Fraction(1)]
    for r in roots:
        p = up.mul(p, [-r, Fraction(1)])
    for _ in range(extra):
        p = up.mul(p, [Fraction(1), 0, 1])  # no real zeros
    ivs = isolate_real_roots(p)
    distinct = sorted(set(roots))
    assert len(ivs) == len(distinct)
    for iv in ivs:
        assert up.count_roots(list(iv.poly), iv.lo, iv.hi) == 1
    got = sorted(refine_root(iv, Fraction(1, 10 ** 20)) for iv in ivs)
    with mpmath.workprec(256):
        for g, r in zip(got, distinct):
            assert abs(g - mpmath.mpf(r.numerator) / r.denominator) < mpmath.mpf(10) ** -15


def test_precision_floor_rejected():
    (iv,) = isolate_real_roots([-7, 5])
    with pytest.raises(ValueError):
        refine_root(iv, precision_bits=8)
