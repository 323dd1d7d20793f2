"""Comparisons of computed results against the stored reference values.

Each check returns a :class:`Check` with a pass flag, report lines and the
raw rows it compared, so the CLI and the test-suite share one code path.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable

import mpmath

from . import hf2model as hm
from .groebner import Budget, MonomialOrder, groebner_basis, lex_basis, standard_monomials
from .numkernel import as_fraction, format_rational
from .polyring import Polynomial, VarTable, parse_polynomial
from .rootsolve import RealSolution, solve_chain, solve_triangular_system
from .stickelberger import compare_solution_sets, solve_by_eigenvalues
from .triangular import TriangularSet, decompose_triangular


def load_golden() -> dict:
    return json.loads(resources.files("polyhf").joinpath("data/golden.json").read_text(encoding="utf-8"))


@dataclass
class Check:
    name: str
    ok: bool = True
    lines: list[str] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    def expect(self, cond: bool, text: str) -> None:
        self.lines.append(("ok    " if cond else "FAIL  ") + text)
        if not cond:
            self.ok = False


@dataclass
class Context:
    config: hm.HF2Config = field(default_factory=hm.HF2Config)
    tol: Fraction = Fraction(1, 10 ** 8)
    seed: int = 0
    budget: Budget | None = None


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------- shared solves

def fixed_r_generators(ctx: Context, r0=Fraction(7, 5)) -> hm.ModelSystem:
    return hm.apply_constraint(hm.uhf_stationarity(ctx.config), hm.FixedDistance(r0))


def solve_fixed_r(ctx: Context) -> tuple[list[RealSolution], object]:
    ms = fixed_r_generators(ctx)
    T = decompose_triangular(lex_basis(ms.polys, ms.vars, ctx.budget), ctx.budget)
    return solve_triangular_system(T, ms.polys, ctx.tol, ctx.config.precision_bits), T


def sign_families(solutions, names) -> list[dict]:
    """One representative per wavefunction-sign class, keyed on absolute values."""
    fams: dict = {}
    for s in solutions:
        key = tuple(round(abs(_f(s.values[n])), 6) if n in "stuv" else round(_f(s.values[n]), 6) for n in names)
        fams.setdefault(key, s)
    return list(fams.values())


# ---------------------------------------------------------------- checks

def check_functional(ctx: Context) -> Check:
    g = load_golden()["omega"]
    c = Check("functional")
    F = hm.build_energy_functional(ctx.config)
    reference = parse_polynomial(g["text"], F.vars).scale(Fraction(1, g["scale"]))
    tol = as_fraction(g["tolerance"])
    monos = set(reference.terms) | set(F.omega.terms)
    worst, exact = Fraction(0), 0
    for m in monos:
        d = abs(reference.terms.get(m, Fraction(0)) - F.omega.terms.get(m, Fraction(0)))
        worst = max(worst, d)
        exact += d == 0
    c.expect(worst <= tol, f"{len(monos)} coefficients, max deviation {format_rational(worst)} (tolerance {g['tolerance']})")
    c.lines.append(f"      {exact}/{len(monos)} coefficients identical")
    return c


def _positive_multiple(p: Polynomial, q: Polynomial) -> Fraction | None:
    """Positive rational k with q == k*p, else None."""
    if p.is_zero() or q.is_zero():
        return None
    m = next(iter(p.terms))
    if m not in q.terms:
        return None
    k = q.terms[m] / p.terms[m]
    return k if k > 0 and p.scale(k) == q else None


def corrected_stationarity_texts() -> list[str]:
    """Reference stationarity polynomials with the recorded typo corrections applied."""
    g = load_golden()["stationarity"]
    texts = list(g["polys"])
    for fix in g["corrections"]:
        i = fix["equation"] - 1
        texts[i], n = re.subn(fix["pattern"], fix["replace"], texts[i])
        if n == 0:
            raise ValueError(f"correction for equation {fix['equation']} no longer applies")
    return texts


def check_stationarity(ctx: Context) -> Check:
    g = load_golden()["stationarity"]
    c = Check("stationarity")
    ms = hm.uhf_stationarity(ctx.config)
    for fix in g["corrections"]:
        c.lines.append(f"      equation {fix['equation']} corrected: {fix['note']}")
    for i, (p, text) in enumerate(zip(ms.polys, corrected_stationarity_texts()), 1):
        q = parse_polynomial(text, ms.vars)
        k = _positive_multiple(p, q)
        c.expect(k is not None, f"equation {i} ({ms.labels[i - 1]}): "
                 + (f"reference = {format_rational(k)} x generated" if k else "no positive rational multiple"))
    return c


def check_fixed_distance(ctx: Context) -> Check:
    gold = load_golden()["fixed_distance"]
    c = Check("fixed-distance")
    sols, T = solve_fixed_r(ctx)
    names = ("s", "t", "u", "v", "ev", "ew")
    F = hm.transform_symmetric(hm.build_energy_functional(ctx.config))
    fams = sign_families(sols, names)
    c.expect(len(sols) == 16, f"{len(sols)} real solutions from {len(T)} triangular sets")
    c.expect(len(fams) == len(gold["rows"]), f"{len(fams)} sign-deduplicated families")
    tol = float(as_fraction(gold["tolerance"]))
    for i, row in enumerate(gold["rows"], 1):
        target = {n: float(as_fraction(x)) for n, x in zip(gold["columns"], row)}
        best, dev = None, float("inf")
        for s in fams:
            d = max(abs(abs(_f(s.values[n])) - abs(target[n])) if n in "stuv" else abs(_f(s.values[n]) - target[n])
                    for n in names)
            if d < dev:
                best, dev = s, d
        etot = hm.total_energy(best, F)
        de = abs(_f(etot) - target["etot"])
        c.expect(dev < tol and de < tol, f"solution {i}: max |d| {dev:.2e}, |dEtot| {de:.2e}, Etot {_f(etot):.6f}")
        c.rows.append({**{n: _f(best.values[n]) for n in names}, "r": _f(best.values["r"]), "etot": _f(etot)})
    return c


def check_chains(ctx: Context) -> Check:
    g = load_golden()["fixed_r_chains"]
    c = Check("chains")
    vt = VarTable(g["vars"])
    ours, T = solve_fixed_r(ctx)
    reference = []
    for k, chain in enumerate(g["chains"], 1):
        ts = TriangularSet([parse_polynomial(s, vt) for s in chain], tuple(g["solve_order"]), vt)
        branches, rep = solve_chain(ts, ctx.config.precision_bits, k)
        reference.extend(RealSolution(b, mpmath.mpf(0), f"ref:{k}") for b in branches)
        covered = all(any(max(abs(b[n] - s.values[n]) for n in vt.names) < 1e-6 for s in ours) for b in branches)
        c.expect(covered, f"reference set {k}: {len(branches)} real zeros, {rep.complex_branches} complex branches, "
                 + ("all among computed solutions" if covered else "missing from computed solutions"))
    agree, notes = compare_solution_sets(ours, reference, Fraction(1, 10 ** 6))
    c.expect(agree, f"union of reference sets equals computed solution set ({len(ours)} zeros)")
    c.lines.extend("      " + n for n in notes)
    return c


def _in_range(r: float, lo=1.0, hi=2.0) -> bool:
    return lo <= r <= hi


def ground_state_solutions(ctx: Context) -> list[RealSolution]:
    ms = hm.apply_constraint(hm.uhf_stationarity(ctx.config), hm.GroundState())
    T = decompose_triangular(lex_basis(ms.polys, ms.vars, ctx.budget), ctx.budget)
    return solve_triangular_system(T, ms.polys, ctx.tol, ctx.config.precision_bits)


def check_ground_state(ctx: Context) -> Check:
    gold = load_golden()["ground_state"]
    c = Check("ground-state")
    sols = ground_state_solutions(ctx)
    tol = float(as_fraction(gold["tolerance"]))
    tol_ev1 = float(as_fraction(gold["tolerance_ev_row1"]))
    roots = sorted({round(_f(s.values["r"]), 9) for s in sols})
    c.lines.append(f"      real r values: {', '.join(f'{r:.6f}' for r in roots)}")
    for i, row in enumerate(gold["rows"], 1):
        r, ev, t = (float(as_fraction(x)) for x in row)
        cands = [s for s in sols if abs(_f(s.values["r"]) - r) < tol]
        ev_tol = tol_ev1 if i == 1 else tol
        hit = [s for s in cands if abs(_f(s.values["ev"]) - ev) < ev_tol and abs(abs(_f(s.values["t"])) - t) < tol]
        got = hit[0] if hit else (cands[0] if cands else None)
        desc = "none" if got is None else f"r {_f(got.values['r']):.6f}, ev {_f(got.values['ev']):.6f}, |t| {abs(_f(got.values['t'])):.6f}"
        c.expect(bool(hit), f"row {i} ({row[0]}, {row[1]}, {row[2]}): {desc}")
        if got is not None:
            c.rows.append({"r": _f(got.values["r"]), "ev": _f(got.values["ev"]), "t": abs(_f(got.values["t"]))})
    in_range = [r for r in roots if _in_range(r)]
    c.expect(len(in_range) == 1 and abs(in_range[0] - float(as_fraction(gold["rows"][gold["in_range"]][0]))) < tol,
             f"single root inside the expansion's validity range: {in_range}")
    return c


def rhf_optimization(ctx: Context):
    ms = hm.rhf_optimization_system(ctx.config)
    G = groebner_basis(ms.polys, MonomialOrder("grevlex", ms.vars), ctx.budget)
    return ms, G


def check_quotient_basis(ctx: Context) -> Check:
    g = load_golden()["standard_monomials"]
    c = Check("quotient-basis")
    ms, G = rhf_optimization(ctx)
    vt = ms.vars
    ours = {Polynomial(vt, {m: 1}).to_str(G.order) for m in standard_monomials(G)}
    ref = {parse_polynomial(s, vt).to_str(G.order) for s in g["monomials"]}
    c.expect(ours == ref, f"{len(ours)} standard monomials, reference has {len(ref)}; "
             f"missing {sorted(ref - ours)}, extra {sorted(ours - ref)}")
    return c


def check_eigen_route(ctx: Context) -> Check:
    gold = load_golden()["ground_state"]
    c = Check("eigen-route")
    ms, G = rhf_optimization(ctx)
    sols, report = solve_by_eigenvalues(G, ms.polys, ctx.tol, precision_bits=ctx.config.precision_bits, seed=ctx.seed)
    r, ev, t = (float(as_fraction(x)) for x in gold["rows"][gold["in_range"]])
    hit = [s for s in sols if abs(_f(s.values["r"]) - r) < 1e-3 and abs(_f(s.values["ev"]) - ev) < 1e-3
           and abs(abs(_f(s.values["t"])) - t) < 1e-3]
    c.expect(bool(hit), f"eigenvalue route: {len(sols)} real zeros; in-range zero "
             + (f"r {_f(hit[0].values['r']):.6f}, ev {_f(hit[0].values['ev']):.6f}" if hit else "not found"))
    T = decompose_triangular(lex_basis(ms.polys, ms.vars, ctx.budget), ctx.budget)
    tri = solve_triangular_system(T, ms.polys, ctx.tol, ctx.config.precision_bits)
    agree, notes = compare_solution_sets(tri, sols, Fraction(1, 10 ** 6))
    c.expect(agree, f"triangular route ({len(tri)}) and eigenvalue route ({len(sols)}) agree")
    c.lines.extend("      " + n for n in notes)
    return c


def inverse_solutions(ctx: Context, e_gap) -> tuple[list[RealSolution], hm.ModelSystem]:
    ms = hm.build_rhf_inverse_system(ctx.config, e_gap)
    gens = ms.nonzero()
    T = decompose_triangular(lex_basis(gens, ms.vars, ctx.budget), ctx.budget)
    return solve_triangular_system(T, gens, ctx.tol, ctx.config.precision_bits), ms


def check_inverse(ctx: Context) -> Check:
    g = load_golden()["inverse"]
    c = Check("inverse")
    sols, _ = inverse_solutions(ctx, as_fraction(g["egap"]))
    roots = sorted({round(_f(s.values["r"]), 9) for s in sols})
    tol = float(as_fraction(g["tolerance"]))
    ref = [float(as_fraction(x)) for x in g["roots"]]
    c.lines.append(f"      computed r: {', '.join(f'{r:.6f}' for r in roots)}")
    c.lines.append(f"      reference r: {', '.join(g['roots'])}")
    matched = len(roots) == len(ref) and all(abs(a - b) < tol for a, b in zip(roots, ref))
    c.expect(matched, f"real r roots within {g['tolerance']} of the reference")
    lo, hi = (float(as_fraction(x)) for x in g["validity"])
    valid = [r for r in roots if _in_range(r, lo, hi)]
    target = float(as_fraction(g["in_range"]))
    c.expect(len(valid) == 1 and abs(valid[0] - target) < tol, f"only root in [{lo}, {hi}]: {valid}")
    c.rows = [{"r": r} for r in roots]
    return c


def infeasibility_basis(ctx: Context, e_gap):
    ms = hm.apply_constraint(hm.build_rhf_inverse_system(ctx.config, e_gap), hm.Stability())
    return groebner_basis(ms.nonzero(), MonomialOrder("grevlex", ms.vars), ctx.budget)


def check_infeasible(ctx: Context) -> Check:
    g = load_golden()["infeasible"]
    c = Check("infeasible")
    G = infeasibility_basis(ctx, as_fraction(g["egap"]))
    text = [p.to_str(G.order) for p in G.polys]
    c.expect(text == g["basis"], f"reduced basis with the stability condition: {{{', '.join(text)}}}")
    return c


def deviation_grid() -> list[Fraction]:
    return [Fraction(k, 20) for k in range(10, 81)]


def check_deviation_curve(ctx: Context) -> Check:
    g = load_golden()["deviation_curve"]
    c = Check("deviation-curve")
    curve = hm.deviation_curve(ctx.config, deviation_grid())
    lo, hi = (as_fraction(x) for x in g["band"])
    band = [d for r, d in curve if lo <= r <= hi]
    worst = max(band)
    c.expect(worst < _f(as_fraction(g["band_max"])), f"max relative deviation on [{lo}, {hi}]: {_f(worst):.4f}")
    far = as_fraction(g["far_r"])
    at_far = next(d for r, d in curve if r == far)
    c.expect(at_far > _f(as_fraction(g["far_min"])), f"relative deviation at r = {far}: {_f(at_far):.4f}")
    c.rows = [{"r": _f(r), "relative_deviation": _f(d)} for r, d in curve]
    return c


def gap_grid() -> list[Fraction]:
    return sorted(set([Fraction(k, 20) for k in range(16, 61)] + [Fraction(1643, 1000)]))


def check_gap_curve(ctx: Context) -> Check:
    g = load_golden()["gap_curve"]
    c = Check("gap-curve")
    rows = hm.eigen_curve(ctx.config, gap_grid(), ctx.tol)
    by_r = {row["r"]: row for row in rows}
    r1 = as_fraction(g["r"])
    gap = by_r[r1]["gap"]
    c.expect(gap is not None and abs(_f(gap) - _f(as_fraction(g["gap"]))) < _f(as_fraction(g["gap_tolerance"])),
             f"gap at r = {g['r']}: {_f(gap):.6f}" if gap is not None else "no solution at the gap point")
    r0 = as_fraction(g["r_ground"])
    eocc = by_r[r0]["eocc"]
    c.expect(eocc is not None and abs(_f(eocc) - _f(as_fraction(g["eocc_ground"]))) < _f(as_fraction(g["eocc_tolerance"])),
             f"occupied eigenvalue at r = {g['r_ground']}: {_f(eocc):.6f}")
    missing = [format_rational(r["r"]) for r in rows if r["eocc"] is None]
    c.lines.append(f"      {len(rows)} grid points, {len(missing)} without a real solution")
    c.rows = [{"r": _f(r["r"]), "eocc": None if r["eocc"] is None else _f(r["eocc"]),
               "eunocc": None if r["eunocc"] is None else _f(r["eunocc"]),
               "gap": None if r["gap"] is None else _f(r["gap"]), "flag": r["flag"]} for r in rows]
    return c


CHECKS: dict[str, Callable[[Context], Check]] = {
    "functional": check_functional,
    "stationarity": check_stationarity,
    "fixed-distance": check_fixed_distance,
    "chains": check_chains,
    "ground-state": check_ground_state,
    "quotient-basis": check_quotient_basis,
    "eigen-route": check_eigen_route,
    "inverse": check_inverse,
    "infeasible": check_infeasible,
    "deviation-curve": check_deviation_curve,
    "gap-curve": check_gap_curve,
}
