"""Closed-form integrals against direct quadrature in prolate spheroidal coordinates."""

from fractions import Fraction

import mpmath as mp
import pytest

from polyhf import hf2model as hm
from polyhf import symexpr as sx

DISTANCES = ["0.8", "1.4", "2.0"]
TOL = 1e-10


def spheroidal(R, f):
    """Integral of f over space for densities normalized with a 1/pi factor; the
    azimuthal 2*pi is folded in."""
    g = lambda mu, nu: f(R * (mu + nu) / 2, R * (mu - nu) / 2, mu) * (mu * mu - nu * nu)
    return 2 * (R / 2) ** 3 * mp.quad(g, [1, 2, 5, mp.inf], [-1, 1])


def potential(r, z=1):
    """Electrostatic potential of a unit 1s density with exponent 2z."""
    return 1 / r - mp.exp(-2 * z * r) * (z + 1 / r)


def exchange(R):
    # the overlap density depends on mu only, so the Neumann series stops at l = 2
    q0 = lambda m: mp.log((m + 1) / (m - 1)) / 2
    p2 = lambda m: (3 * m * m - 1) / 2
    terms = {
        0: (lambda m: 2 * m * m - mp.mpf(2) / 3, lambda m: 1, q0),
        2: (lambda m: -mp.mpf(4) / 15, p2, lambda m: p2(m) * q0(m) - 3 * m / 2),
    }
    total = 0
    for l, (f, P, Q) in terms.items():
        inner = lambda m1: mp.quad(lambda m2: mp.exp(-R * m2) * f(m2) * P(m2), [1, m1])
        total += (2 * l + 1) * 2 * mp.quad(lambda m1: mp.exp(-R * m1) * f(m1) * Q(m1) * inner(m1), [1, 2, 5, mp.inf])
    return (2 / R) * (2 * (R / 2) ** 3) ** 2 * total


@pytest.fixture(scope="module")
def table():
    return hm.build_integral_table()


@pytest.fixture(params=DISTANCES)
def R(request):
    return request.param


def _check(table, R, name, ref):
    got = table.values_at(Fraction(R), 128)[name]
    assert abs(got - ref) < TOL, (name, R, got, ref)


def test_overlap(table, R):
    with mp.workdps(20):
        r = mp.mpf(R)
        _check(table, R, "overlap", spheroidal(r, lambda a, b, m: mp.exp(-r * m)))


def test_one_electron(table, R):
    with mp.workdps(20):
        r = mp.mpf(R)
        S = spheroidal(r, lambda a, b, m: mp.exp(-r * m))
        _check(table, R, "attraction_ab_a", -spheroidal(r, lambda a, b, m: mp.exp(-r * m) / a))
        _check(table, R, "attraction_aa_b", -spheroidal(r, lambda a, b, m: mp.exp(-2 * a) / b))
        # -1/2 Laplacian of exp(-r) is exp(-r) * (1/r - 1/2)
        _check(table, R, "kinetic_ab", -S / 2 + spheroidal(r, lambda a, b, m: mp.exp(-r * m) / b))


def test_coulomb_and_hybrid(table, R):
    with mp.workdps(20):
        r = mp.mpf(R)
        _check(table, R, "coulomb_aabb", spheroidal(r, lambda a, b, m: mp.exp(-2 * a) * potential(b)))
        _check(table, R, "hybrid_aaab", spheroidal(r, lambda a, b, m: mp.exp(-r * m) * potential(a)))


def test_exchange(table, R):
    with mp.workdps(20):
        _check(table, R, "exchange_abab", exchange(mp.mpf(R)))


def test_unequal_exponent_coulomb():
    za, zb = 1, Fraction(3, 2)
    e = hm.coulomb_expr(za, za, zb, zb)
    with mp.workdps(20):
        r = mp.mpf("1.4")
        z = mp.mpf(3) / 2
        ref = spheroidal(r, lambda a, b, m: mp.exp(-2 * a) * potential(b, z))
        assert abs(sx.evaluate_expr(e, {"r": Fraction(7, 5)}, 128) - ref) < TOL


def test_fixed_values(table):
    v = table.values_at(Fraction(7, 5), 128)
    assert v["coulomb_aaaa"] == mp.mpf(5) / 8
    assert v["kinetic_aa"] == mp.mpf(1) / 2
    assert v["attraction_aa_a"] == -1
    with mp.workprec(128):
        assert abs(v["nuclear"] - mp.mpf(5) / 7) < 1e-30


def test_small_distance_limits(table):
    v = table.values_at(Fraction(1, 10 ** 6), 256)
    assert abs(v["overlap"] - 1) < 1e-9
    assert abs(v["coulomb_aabb"] - mp.mpf(5) / 8) < 1e-5
    assert abs(v["exchange_abab"] - mp.mpf(5) / 8) < 1e-5
