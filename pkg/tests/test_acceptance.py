"""End-to-end acceptance checks against the stored reference values.

Each test records one pass/fail line; the lines are repeated in the terminal
summary under "acceptance criteria".
"""

import time
from fractions import Fraction

import mpmath

from polyhf import hf2model as hm
from polyhf import reproduce as rp
from polyhf import univariate as up
from polyhf.groebner import ideal_contains, lex_basis, normal_form, s_polynomial
from polyhf.polyring import differentiate, evaluate
from polyhf.rootsolve import isolate_real_roots
from polyhf.stickelberger import commute_exactly, multiplication_matrices


def summary(check: rp.Check) -> str:
    return "; ".join(line.strip() for line in check.lines)


def test_energy_functional_coefficients(ctx, criterion):
    start = time.perf_counter()
    check = rp.check_functional(ctx)
    elapsed = time.perf_counter() - start
    ok = check.ok and elapsed < 60
    criterion(1, ok, f"{summary(check)}; {elapsed:.1f} s")
    assert ok, check.lines


def test_stationarity_polynomials(ctx, criterion):
    check = rp.check_stationarity(ctx)
    n = sum(line.startswith("ok") for line in check.lines)
    criterion(2, check.ok, f"{n}/7 stationarity polynomials are positive multiples of the reference")
    assert check.ok, check.lines


def test_fixed_distance_solutions(ctx, criterion):
    start = time.perf_counter()
    check = rp.check_fixed_distance(ctx)
    elapsed = time.perf_counter() - start
    ok = check.ok and elapsed < 600
    criterion(3, ok, f"{summary(check)}; {elapsed:.1f} s")
    assert ok, check.lines


def test_triangular_chains_match_reference_zero_sets(ctx, criterion):
    check = rp.check_chains(ctx)
    criterion(4, check.ok, summary(check))
    assert check.ok, check.lines


def test_ground_state_geometry(ctx, criterion):
    check = rp.check_ground_state(ctx)
    criterion(5, check.ok, summary(check))
    assert check.ok, check.lines


def test_inverse_gap_distances(ctx, criterion):
    check = rp.check_inverse(ctx)
    criterion(6, check.ok, summary(check))
    assert check.ok, check.lines


def test_infeasibility_certificate(ctx, criterion):
    check = rp.check_infeasible(ctx)
    criterion(7, check.ok, summary(check))
    assert check.ok, check.lines


def test_eigenvalue_route(ctx, rhf_opt, criterion):
    basis = rp.check_quotient_basis(ctx)
    _, G = rhf_opt
    mats = multiplication_matrices(G)
    commute = all(commute_exactly(p, q) for i, p in enumerate(mats) for q in mats[i + 1:])
    eig = rp.check_eigen_route(ctx)
    ok = basis.ok and commute and eig.ok
    criterion(8, ok, f"{summary(basis)}; matrices commute exactly: {commute}; {summary(eig)}")
    assert ok, basis.lines + eig.lines


def test_curve_data(ctx, criterion):
    dev = rp.check_deviation_curve(ctx)
    gap = rp.check_gap_curve(ctx)
    ok = dev.ok and gap.ok
    criterion(9, ok, f"{summary(dev)}; {summary(gap)}")
    assert ok, dev.lines + gap.lines


def _property_suite(fixed_r, ground_state, rhf_opt) -> list[tuple[str, bool]]:
    results = []
    ms, G = rhf_opt
    pairs_zero = all(normal_form(s_polynomial(f, g, G.order), G).is_zero()
                     for i, f in enumerate(G.polys) for g in G.polys[i + 1:])
    results.append(("S-polynomials reduce to zero", pairs_zero))
    results.append(("generators lie in the ideal", all(ideal_contains(G, p) for p in ms.polys)))
    probe = ms.polys[0] * ms.polys[1] + ms.polys[2] ** 2 + differentiate(ms.polys[0], "r")
    nf = normal_form(probe, G)
    results.append(("normal form is idempotent", normal_form(nf, G) == nf and ideal_contains(G, probe - nf)))

    gs = hm.apply_constraint(hm.uhf_stationarity(), hm.GroundState())
    elim = [p for p in lex_basis(gs.polys, gs.vars).polys if p.variables() == ("r",)][0]
    dense = up.from_polynomial(elim, "r")
    ivs = isolate_real_roots(dense)
    sound = all(up.count_roots(dense, iv.lo, iv.hi) == 1 for iv in ivs)
    sound &= len(ivs) == len({round(float(s["r"]), 9) for s in ground_state})
    results.append(("Sturm isolation is sound", sound))

    F = hm.build_energy_functional()
    pt = {"a": Fraction(3, 5), "b": Fraction(1, 2), "c": Fraction(-2, 5), "d": Fraction(7, 10),
          "ev": Fraction(-3, 5), "ew": Fraction(-1, 2), "r": Fraction(3, 2)}
    with mpmath.workprec(256):
        h = mpmath.mpf(2) ** -64
        fd_ok = True
        for n in F.vars.names:
            x0 = mpmath.mpf(pt[n].numerator) / pt[n].denominator
            fd = (F.omega({**pt, n: x0 + h}) - F.omega({**pt, n: x0 - h})) / (2 * h)
            fd_ok &= abs(fd - evaluate(differentiate(F.omega, n), pt)) < mpmath.mpf(10) ** -30
    results.append(("gradient matches finite differences", fd_ok))

    sols, _, fixed = fixed_r
    with mpmath.workprec(256):
        worst = max(abs(evaluate(p, s.values)) for s in sols for p in fixed.polys)
        worst = max([worst] + [abs(evaluate(p, s.values)) for s in ground_state for p in gs.polys])
    results.append((f"solution residuals {mpmath.nstr(worst, 3)} < 1e-6", worst < 1e-6))

    energies = sorted(float(hm.total_energy(s, fixed.functional)) for s in sols)
    ground = [float(hm.total_energy(s, fixed.functional)) for s in sols if abs(s["s"]) < 1e-12 and abs(s["v"]) < 1e-12]
    results.append(("ground state has the lowest energy", min(ground) == energies[0]))
    return results


def test_property_suites(fixed_r, ground_state, rhf_opt, criterion):
    results = _property_suite(fixed_r, ground_state, rhf_opt)
    ok = all(r for _, r in results)
    failed = [name for name, r in results if not r]
    criterion(10, ok, f"{len(results) - len(failed)}/{len(results)} properties hold" +
              (f"; failing: {', '.join(failed)}" if failed else ""))
    assert ok, failed
