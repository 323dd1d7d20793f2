from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhf import hf2model as hm
from polyhf.groebner import ideal_contains, lex_basis
from polyhf.polyring import Polynomial, VarTable, differentiate, evaluate, substitute


@pytest.fixture(scope="module")
def symmetric(functional):
    return hm.transform_symmetric(functional)


def test_functional_shape(functional):
    assert functional.vars.names == hm.UHF_RAW_VARS
    assert functional.omega.degree("r") == 4
    assert max(sum(m[:4]) for m in functional.omega.terms) == 4
    grid = functional.config.grid
    assert all((c / grid).denominator == 1 for c in functional.omega.terms.values())


def test_config_validation():
    with pytest.raises(ValueError):
        hm.HF2Config(taylor_degree=-1)
    with pytest.raises(hm.UnsupportedError):
        hm.build_energy_functional(hm.HF2Config(exponent=Fraction(6, 5)))


def test_transform_examples(functional, symmetric):
    assert symmetric.vars.names == hm.UHF_VARS
    pt = {"s": Fraction(1, 3), "t": Fraction(2, 5), "u": Fraction(-1, 2), "v": Fraction(1, 7),
          "ev": Fraction(-3, 5), "ew": Fraction(1, 4), "r": Fraction(3, 2)}
    raw = {"a": pt["t"] + pt["s"], "b": pt["t"] - pt["s"], "c": pt["u"] + pt["v"], "d": pt["u"] - pt["v"],
           "ev": pt["ev"], "ew": pt["ew"], "r": pt["r"]}
    assert evaluate(symmetric.omega, pt) == evaluate(functional.omega, raw)


def test_transform_is_invertible(functional, symmetric):
    back = hm.transform_symmetric(symmetric, inverse=True)
    assert back.omega == functional.omega
    with pytest.raises(ValueError):
        hm.transform_symmetric(symmetric)


def test_analytic_and_polynomial_agree_near_center(functional):
    pt = {"a": Fraction(1, 2), "b": Fraction(1, 2), "c": Fraction(1, 2), "d": Fraction(1, 2),
          "ev": Fraction(-1, 2), "ew": Fraction(-1, 2), "r": Fraction(7, 5)}
    with mpmath.workprec(256):
        exact = functional.exact_value(pt)
        assert abs(mpmath.mpf(evaluate(functional.omega, pt).numerator) / evaluate(functional.omega, pt).denominator
                   - exact) < 0.01


def test_restricted_collapse(symmetric):
    vt = VarTable(("t", "u", "ev", "ew", "r"))
    P = {n: Polynomial.var(vt, n) for n in vt.names}
    spinless = symmetric.omega.subs({"s": 0, "v": 0}).change_vars(vt)
    collapsed = substitute(spinless, {"u": P["t"], "ew": P["ev"]}).change_vars(VarTable(hm.RHF_OPT_VARS))
    assert collapsed == hm.rhf_optimization_functional().omega


def test_stationarity_generators_are_gradients(symmetric):
    ms = hm.uhf_stationarity()
    assert ms.vars.names == hm.UHF_VARS
    assert ms.labels == ["d/dt", "d/ds", "d/du", "d/dv", "d/dev", "d/dew", "d/dr"]
    for p, label in zip(ms.polys, ms.labels):
        g = differentiate(symmetric.omega, label[3:])
        assert set(p.terms) == set(g.terms)
        ratio = {p.terms[m] / g.terms[m] for m in g.terms}
        assert len(ratio) == 1 and ratio.pop() > 0


def test_constraints():
    base = hm.uhf_stationarity()
    fixed = hm.apply_constraint(base, hm.FixedDistance(Fraction(7, 5)))
    assert "d/dr" not in fixed.labels and "fixed r" in fixed.labels
    assert len(fixed.polys) == len(base.polys)
    ground = hm.apply_constraint(base, hm.GroundState())
    assert ground.vars.names == ("t", "u", "ev", "ew", "r")
    with pytest.raises(ValueError):
        hm.apply_constraint(base, hm.GapTarget())
    with pytest.raises(ValueError):
        hm.apply_constraint(base, hm.Stability())
    rhf = hm.rhf_fixed_system()
    gap = hm.apply_constraint(rhf, hm.GapTarget(Fraction(9, 10)))
    G = lex_basis(gap.nonzero(), gap.vars)
    E = Polynomial.var(gap.vars, "eunocc") - Polynomial.var(gap.vars, "eocc") - Fraction(9, 10)
    assert ideal_contains(G, E)


def test_orthogonality_vanishes_identically():
    rhf = hm.rhf_fixed_system()
    orth = hm.orthogonality_polynomial(rhf.vars, rhf.functional.config)
    assert orth.is_zero()
    assert len(rhf.nonzero()) == len(rhf.polys) - 1


coord = st.fractions(min_value=-2, max_value=2, max_denominator=50)
points = st.fixed_dictionaries({n: coord for n in hm.UHF_RAW_VARS[:-1]}).map(
    lambda d: dict(d, r=Fraction(7, 5) + d["a"] / 4))


@settings(max_examples=25, deadline=None)
@given(points, st.sampled_from(hm.UHF_RAW_VARS))
def test_gradient_matches_finite_difference(functional, pt, name):
    with mpmath.workprec(256):
        h = mpmath.mpf(2) ** -60
        f = lambda x: functional.omega({**pt, name: x})
        x0 = mpmath.mpf(pt[name].numerator) / pt[name].denominator
        fd = (f(x0 + h) - f(x0 - h)) / (2 * h)
        g = evaluate(differentiate(functional.omega, name), pt)
        assert abs(fd - g) < mpmath.mpf(10) ** -30


def test_ground_state_energy_is_minimal(fixed_r):
    sols, _, ms = fixed_r
    F = ms.functional
    energies = [(hm.total_energy(s, F), s) for s in sols]
    e_min, best = min(energies, key=lambda x: x[0])
    assert abs(e_min - mpmath.mpf("-1.096236")) < 1e-4
    assert abs(best["s"]) < 1e-20 and abs(best["v"]) < 1e-20
    assert all(e > e_min + 0.1 for e, s in energies if abs(s["s"]) > 1e-6 or abs(s["v"]) > 1e-6)


def test_solution_residuals(fixed_r, ground_state, inverse):
    cases = [(fixed_r[0], fixed_r[2].polys)]
    ms = hm.apply_constraint(hm.uhf_stationarity(), hm.GroundState())
    cases.append((ground_state, ms.polys))
    cases.append((inverse[0], inverse[1].nonzero()))
    for sols, gens in cases:
        assert sols
        for s in sols:
            with mpmath.workprec(256):
                assert max(abs(evaluate(p, s.values)) for p in gens) < 1e-6


def test_gap_shrinks_with_distance():
    rows = hm.eigen_curve(None, [Fraction(k, 10) for k in range(12, 21, 2)])
    gaps = [r["gap"] for r in rows]
    assert all(g is not None for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_deviation_curve_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        hm.deviation_curve(None, [Fraction(0)])


def test_total_energy_checks_normalization(functional):
    pt = {n: Fraction(1) for n in hm.UHF_RAW_VARS}
    with pytest.raises(ValueError):
        hm.total_energy(pt, functional)


def test_rounding_modes_differ_by_at_most_one_step():
    near = hm.build_energy_functional(hm.HF2Config(rounding="nearest")).omega
    trunc = hm.build_energy_functional().omega
    step = hm.HF2Config().grid
    assert near != trunc
    for m in set(near.terms) | set(trunc.terms):
        assert abs(near.terms.get(m, 0) - trunc.terms.get(m, 0)) <= step
