import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhf.groebner import (
    Budget,
    BudgetExceeded,
    DimensionError,
    PolySystem,
    fglm,
    groebner_basis,
    ideal_contains,
    is_trivial_ideal,
    is_zero_dimensional,
    lex_basis,
    multiplication_tables,
    normal_form,
    s_polynomial,
    standard_monomials,
)
from polyhf.polyring import Polynomial, VarTable, grevlex, lex, parse_polynomial

VT = VarTable(("x", "y"))
LEX = lex("x", "y")


def P(text, vt=VT):
    return parse_polynomial(text, vt)


def test_lex_example():
    G = groebner_basis([P("x^2-1"), P("x*y-1")], LEX)
    assert set(G.polys) == {P("x-y"), P("y^2-1")}


def test_normal_form_examples():
    G = groebner_basis([P("x^2-1"), P("x*y-1")], LEX)
    assert normal_form(P("x^2"), G) == P("1")
    assert normal_form(P("x*y+x"), G) == P("y+1")
    assert normal_form(P("x^2-1"), G).is_zero()


def test_trivial_and_dimension():
    assert is_trivial_ideal(groebner_basis([P("x*y-1"), P("x")], LEX))
    G = groebner_basis([P("x^2-1"), P("x*y-1")], LEX)
    assert not is_trivial_ideal(G)
    assert is_zero_dimensional(G)
    assert not is_zero_dimensional(groebner_basis([P("x*y")], LEX))


def test_standard_monomials_example():
    G = groebner_basis([P("x^2-1"), P("x*y-1")], LEX)
    assert set(standard_monomials(G)) == {(0, 1), (0, 0)}


def test_standard_monomials_needs_finite_quotient():
    with pytest.raises(DimensionError):
        standard_monomials(groebner_basis([P("x*y")], LEX))


def test_budget_exceeded_is_raised():
    vt = VarTable(("x", "y", "z"))
    F = [P("x^2+y*z-2", vt), P("y^2-x*z+1", vt), P("z^2+x-y-3", vt)]
    with pytest.raises(BudgetExceeded):
        groebner_basis(F, lex("x", "y", "z"), Budget(max_spairs=1))
    with pytest.raises(BudgetExceeded):
        groebner_basis(F, lex("x", "y", "z"), Budget(max_terms=3))


def test_fglm_matches_direct_lex():
    vt = VarTable(("x", "y", "z"))
    F = [P("x^2+y*z-2", vt), P("y^2-x*z+1", vt), P("z^2+x-y-3", vt)]
    Ggr = groebner_basis(F, grevlex("x", "y", "z"))
    assert fglm(Ggr, lex("x", "y", "z")) == groebner_basis(F, lex("x", "y", "z"))
    assert lex_basis(F, vt) == groebner_basis(F, lex("x", "y", "z"))


def test_agrees_with_sympy():
    vt = VarTable(("x", "y", "z"))
    texts = ["x^2+y*z-2", "y^2-x*z+1", "z^2+x-y-3"]
    ours = groebner_basis([P(t, vt) for t in texts], grevlex("x", "y", "z"))
    x, y, z = sympy.symbols("x y z")
    ref = sympy.groebner([sympy.sympify(t.replace("^", "**")) for t in texts], x, y, z, order="grevlex")
    theirs = {P(str(g).replace("**", "^"), vt).monic(ours.order) for g in ref.exprs}
    assert set(ours.polys) == theirs


def test_quotient_dimension_counts_zeros():
    # two conics meeting in four points
    G = groebner_basis([P("x^2+y^2-5"), P("x*y-2")], grevlex("x", "y"))
    basis, tables = multiplication_tables(G)
    assert len(basis) == 4
    assert set(tables) == {"x", "y"}


def test_system_document_round_trip():
    S = PolySystem([P("x^2-1"), P("x*y-1")], LEX)
    assert PolySystem.from_json(S.to_json()).polys == S.polys


exps = st.tuples(st.integers(0, 3), st.integers(0, 3))
small = st.dictionaries(exps, st.integers(-4, 4), min_size=1, max_size=4).map(lambda d: Polynomial(VT, d))
gens = st.lists(small, min_size=1, max_size=3).filter(lambda F: any(not p.is_zero() for p in F))
orders = st.sampled_from([lex("x", "y"), grevlex("x", "y")])


@settings(max_examples=40, deadline=None)
@given(gens, orders)
def test_spolynomials_reduce_to_zero(F, order):
    F = [p for p in F if not p.is_zero()]
    G = groebner_basis(F, order)
    for i, f in enumerate(G.polys):
        for g in G.polys[i + 1:]:
            assert normal_form(s_polynomial(f, g, order), G).is_zero()


@settings(max_examples=40, deadline=None)
@given(gens, orders)
def test_generators_are_members(F, order):
    F = [p for p in F if not p.is_zero()]
    G = groebner_basis(F, order)
    for f in F:
        assert ideal_contains(G, f)


@settings(max_examples=40, deadline=None)
@given(gens, orders, small)
def test_normal_form_idempotent(F, order, p):
    F = [q for q in F if not q.is_zero()]
    G = groebner_basis(F, order)
    n = normal_form(p, G)
    assert normal_form(n, G) == n
    assert ideal_contains(G, p - n)


@settings(max_examples=30, deadline=None)
@given(gens, orders)
def test_basis_of_basis_is_itself(F, order):
    F = [p for p in F if not p.is_zero()]
    G = groebner_basis(F, order)
    assert groebner_basis(G.polys, order) == G
