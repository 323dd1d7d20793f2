"""Real solutions of triangular chains by exact isolation and back-substitution.

Level one of a chain is an exact univariate polynomial: its real roots are
isolated with Sturm sequences and refined to ``2**-(precision_bits-16)``.
Later levels are specialized at the already computed (irrational) values;
the specialized coefficients are exact dyadic rationals (the binary value of
the big floats), so isolation stays exact for that perturbed polynomial.
When the root count disagrees between the working precision and twice the
working precision, precision is escalated before the branch is trusted.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import mpmath

from . import univariate as up
from .groebner import PolySystem
from .numkernel import DEFAULT_PRECISION_BITS, as_fraction, to_bigfloat
from .polyring import Polynomial, UsageError, evaluate
from .triangular import TriangularDecomposition, TriangularSet

DEFAULT_TOL = Fraction(1, 10 ** 8)
MAX_PRECISION_BITS = 4096


@dataclass(frozen=True)
class RootInterval:
    lo: Fraction
    hi: Fraction
    poly: tuple  # dense coefficients, constant first

    def __post_init__(self):
        if not self.lo < self.hi:
            raise UsageError("interval endpoints must satisfy lo < hi")


@dataclass
class RealSolution:
    values: dict[str, mpmath.mpf]
    residual: mpmath.mpf
    provenance: str
    precision_bits: int = DEFAULT_PRECISION_BITS

    def __getitem__(self, name: str):
        return self.values[name]

    def as_floats(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.values.items()}

    def to_dict(self, digits: int = 30) -> dict:
        return {
            "values": {k: mpmath.nstr(v, digits) for k, v in self.values.items()},
            "residual": mpmath.nstr(self.residual, 6),
            "provenance": self.provenance,
        }


@dataclass
class ChainReport:
    index: int
    real: int = 0
    complex_branches: int = 0
    degenerate: list[str] = field(default_factory=list)
    escalations: int = 0


class DegenerateBranch(ArithmeticError):
    pass


# ---------------------------------------------------------------- univariate API

def _as_dense(p) -> list:
    if isinstance(p, Polynomial):
        return up.from_polynomial(p)
    return up.trim([as_fraction(c) for c in p])


def isolate_real_roots(p) -> list[RootInterval]:
    """Isolating intervals (lo, hi] for the distinct real roots of a univariate polynomial."""
    dense = _as_dense(p)
    if not dense:
        raise UsageError("cannot isolate roots of the zero polynomial")
    return [RootInterval(lo, hi, tuple(dense)) for lo, hi in up.isolate(dense)]


def refine_root(iv: RootInterval, tol=Fraction(1, 10 ** 30), precision_bits: int = DEFAULT_PRECISION_BITS):
    value, _ = up.refine(list(iv.poly), iv.lo, iv.hi, as_fraction(tol), precision_bits)
    return value


# ---------------------------------------------------------------- back-substitution

def _specialize(p: Polynomial, x: str, point: Mapping[str, mpmath.mpf], precision_bits: int) -> list:
    """Dense coefficients (in ``x``) of ``p`` at ``point``, as exact dyadic rationals."""
    coeffs = p.coefficients_in(x)
    deg = max(coeffs)
    out = [Fraction(0)] * (deg + 1)
    with mpmath.workprec(precision_bits):
        for k, c in coeffs.items():
            val = evaluate(c, point) if c.variables() else c.constant_term()
            out[k] = as_fraction(val if isinstance(val, Fraction) else mpmath.mpf(val))
    return out


def _roots_at(p: Polynomial, x: str, point: dict, precision_bits: int) -> tuple[list, int, int]:
    """Refined real roots of p(point, x), the distinct complex count, and bits used."""
    bits = precision_bits
    while True:
        dense = _specialize(p, x, point, bits)
        lc_mag = abs(dense[-1]) if dense else Fraction(0)
        scale = max((abs(c) for c in dense), default=Fraction(0))
        if not dense or lc_mag <= scale * Fraction(1, 2 ** (bits // 2)):
            raise DegenerateBranch(f"leading coefficient in {x} vanishes at this point")
        ivs = up.isolate(dense)
        check = up.isolate(_specialize(p, x, point, 2 * bits))
        if len(check) == len(ivs) or bits >= MAX_PRECISION_BITS:
            tol = Fraction(1, 2 ** (bits - 16))
            roots = [up.refine(dense, lo, hi, tol, bits)[0] for lo, hi in ivs]
            return roots, up.degree(dense) - len(ivs), bits
        bits *= 2


def residual(system: Iterable[Polynomial], point: Mapping[str, mpmath.mpf], precision_bits: int) -> mpmath.mpf:
    """Max absolute generator value at ``point``, evaluated at twice the working precision."""
    worst = mpmath.mpf(0)
    with mpmath.workprec(2 * precision_bits):
        pt = {k: mpmath.mpf(v) for k, v in point.items()}
        for g in system:
            v = abs(evaluate(g, pt))
            if v > worst:
                worst = v
    return worst


def solve_chain(ts: TriangularSet, precision_bits: int = DEFAULT_PRECISION_BITS,
                index: int = 0) -> tuple[list[dict], ChainReport]:
    report = ChainReport(index)
    branches: list[dict] = [{}]
    for p, x in zip(ts.chain, ts.solve_order):
        nxt = []
        for pt in branches:
            try:
                roots, ncomplex, bits = _roots_at(p, x, pt, precision_bits)
            except DegenerateBranch as exc:
                report.degenerate.append(f"{x}: {exc}")
                continue
            if bits > precision_bits:
                report.escalations += 1
            report.complex_branches += ncomplex
            for r in roots:
                q = dict(pt)
                q[x] = r
                nxt.append(q)
        branches = nxt
    report.real = len(branches)
    return branches, report


def dedupe(solutions: list[RealSolution], tol) -> list[RealSolution]:
    tol = mpmath.mpf(as_fraction(tol).numerator) / as_fraction(tol).denominator
    kept: list[RealSolution] = []
    for s in solutions:
        if any(max(abs(s.values[k] - o.values[k]) for k in s.values) <= tol for o in kept):
            continue
        kept.append(s)
    return kept


def sort_key(sol: RealSolution, names: Sequence[str]) -> tuple:
    return tuple(float(sol.values[n]) for n in names)


def solve_triangular_system(T: TriangularDecomposition, original: PolySystem | Sequence[Polynomial],
                            tol=DEFAULT_TOL, precision_bits: int = DEFAULT_PRECISION_BITS,
                            reports: list | None = None) -> list[RealSolution]:
    """All real solutions of the chains, verified against ``original``.

    Solutions whose residual exceeds ``tol`` are not returned; they are
    recorded as degenerate in ``reports`` when a list is supplied.
    """
    gens = original.polys if isinstance(original, PolySystem) else list(original)
    tol = as_fraction(tol)
    tol_mp = to_bigfloat(tol, precision_bits)
    names = T.var_table.names
    out: list[RealSolution] = []
    for k, ts in enumerate(T.sets):
        branches, rep = solve_chain(ts, precision_bits, k)
        for pt in branches:
            res = residual(gens, pt, precision_bits)
            if res >= tol_mp:
                rep.degenerate.append(f"residual {mpmath.nstr(res, 3)} above tolerance")
                continue
            out.append(RealSolution({n: pt[n] for n in names}, res, f"tri:{k}", precision_bits))
        if reports is not None:
            reports.append(rep)
    out.sort(key=lambda s: sort_key(s, names))
    return dedupe(out, tol)


# ---------------------------------------------------------------- output

def solutions_to_json(solutions: Sequence[RealSolution], digits: int = 30) -> str:
    return json.dumps([s.to_dict(digits) for s in solutions], indent=2) + "\n"


def solutions_to_csv(solutions: Sequence[RealSolution], names: Sequence[str], digits: int = 20) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(names) + ["residual", "provenance"])
    for s in solutions:
        w.writerow([mpmath.nstr(s.values[n], digits) for n in names] + [mpmath.nstr(s.residual, 6), s.provenance])
    return buf.getvalue()
