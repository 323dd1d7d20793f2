from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyhf.groebner import groebner_basis, standard_monomials
from polyhf.polyring import VarTable, grevlex, lex, parse_polynomial
from polyhf.stickelberger import (
    InconsistencyError,
    MultiplicationMatrix,
    commute_exactly,
    compare_solution_sets,
    eigen_solve_system,
    multiplication_matrices,
    multiplication_matrix,
    solve_by_eigenvalues,
)
from polyhf.rootsolve import solve_triangular_system
from polyhf.triangular import decompose_system

VT1 = VarTable(("x",))


def in_basis_order(M, order):
    """Dense matrix with rows and columns permuted to ``order``."""
    idx = [M.basis.index(m) for m in order]
    d = M.dense()
    return [[d[i][j] for j in idx] for i in idx]


def test_companion_matrix_example():
    G = groebner_basis([parse_polynomial("x^2-3*x+2", VT1)], lex("x"))
    M = multiplication_matrix(G, standard_monomials(G), "x")
    assert in_basis_order(M, [(0,), (1,)]) == [[0, -2], [1, 3]]
    report = eigen_solve_system([M])
    vals = sorted(float(mpmath.re(c.values["x"])) for c in report.candidates)
    assert vals == pytest.approx([1.0, 2.0], abs=1e-30)


def test_one_by_one():
    G = groebner_basis([parse_polynomial("x-5/3", VT1)], lex("x"))
    (M,) = multiplication_matrices(G)
    assert M.dense() == [[Fraction(5, 3)]]


def test_noncommuting_input_rejected():
    a = MultiplicationMatrix("x", [(0, 0), (1, 0)], [{1: Fraction(1)}, {}])
    b = MultiplicationMatrix("y", [(0, 0), (1, 0)], [{0: Fraction(1)}, {}])
    assert not commute_exactly(a, b)
    with pytest.raises(InconsistencyError):
        eigen_solve_system([a, b])


def test_complex_zeros_are_labelled():
    vt = VarTable(("x", "y"))
    F = [parse_polynomial("x^2+1", vt), parse_polynomial("y-x", vt)]
    G = groebner_basis(F, grevlex("x", "y"))
    sols, report = solve_by_eigenvalues(G, F)
    assert sols == []
    assert {c.kind for c in report.candidates} == {"complex"}


def test_trace_is_sum_of_eigenvalues():
    vt = VarTable(("x", "y"))
    F = [parse_polynomial("x^2+y^2-5", vt), parse_polynomial("x*y-2", vt)]
    G = groebner_basis(F, grevlex("x", "y"))
    mats = multiplication_matrices(G)
    report = eigen_solve_system(mats)
    for M in mats:
        total = sum(c.values[M.variable] for c in report.candidates)
        assert abs(total - M.trace()) < 1e-40


coefs = st.integers(-4, 4)


@settings(max_examples=20, deadline=None)
@given(coefs, coefs, coefs, coefs)
def test_routes_agree_on_random_systems(a, b, c, d):
    vt = VarTable(("x", "y"))
    F = [parse_polynomial(f"x^2+({a})*y-({c})", vt), parse_polynomial(f"y^2+({b})*x-({d})", vt)]
    G = groebner_basis(F, grevlex("x", "y"))
    mats = multiplication_matrices(G)
    assert all(commute_exactly(p, q) for p in mats for q in mats)
    clustered = eigen_solve_system(mats).clusters
    if clustered:
        return  # repeated zeros; the eigenvalue route only reports a diagnostic
    eig, _ = solve_by_eigenvalues(G, F, Fraction(1, 10 ** 20))
    tri = solve_triangular_system(decompose_system(F), F, Fraction(1, 10 ** 20))
    agree, notes = compare_solution_sets(tri, eig, Fraction(1, 10 ** 20))
    assert agree, notes


def test_rhf_matrices_commute(rhf_opt):
    _, G = rhf_opt
    mats = multiplication_matrices(G)
    assert len(mats[0].basis) == 30
    for i, p in enumerate(mats):
        for q in mats[i + 1:]:
            assert commute_exactly(p, q)
