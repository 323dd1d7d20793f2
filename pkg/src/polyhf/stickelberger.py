"""Multiplication matrices on the quotient ring and joint eigen-extraction of zeros.

For a zero-dimensional ideal with standard monomials ``b_1..b_D``, the matrix
``M_h`` has column ``j`` equal to the coordinates of ``NF(h * b_j)``.  The
transposes share the eigenvectors ``(b_1(p), ..., b_D(p))`` over all zeros
``p``, so one eigendecomposition of a random combination of transposes yields
every zero; each coordinate is read back with a Rayleigh quotient.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .groebner import GroebnerBasis, PolySystem, multiplication_tables, standard_monomials
from .numkernel import DEFAULT_PRECISION_BITS, as_fraction
from .polyring import Monomial, Polynomial, UsageError
from .rootsolve import RealSolution, dedupe, residual, sort_key

DEFAULT_EIGEN_TOL = Fraction(1, 10 ** 30)


class InconsistencyError(ArithmeticError):
    """Multiplication matrices fail to commute (the basis is not a Groebner basis)."""


@dataclass
class MultiplicationMatrix:
    variable: str
    basis: list[Monomial]
    columns: list[dict]  # sparse column j: row index -> rational

    @property
    def size(self) -> int:
        return len(self.basis)

    def dense(self) -> list[list[Fraction]]:
        n = self.size
        rows = [[Fraction(0)] * n for _ in range(n)]
        for j, col in enumerate(self.columns):
            for i, c in col.items():
                rows[i][j] = Fraction(int(c.numerator), int(c.denominator))
        return rows

    def trace(self) -> Fraction:
        t = 0
        for j, col in enumerate(self.columns):
            t += col.get(j, 0)
        return Fraction(int(t.numerator), int(t.denominator)) if t else Fraction(0)

    def to_dict(self) -> dict:
        from .numkernel import format_rational

        return {
            "variable": self.variable,
            "basis": [list(m) for m in self.basis],
            "matrix": [[format_rational(c) for c in row] for row in self.dense()],
        }


@dataclass
class EigenCandidate:
    values: dict[str, mpmath.mpc]
    residuals: dict[str, mpmath.mpf]
    kind: str  # "real" | "complex"
    multiplicity: int = 1
    index: int = 0

    def real_values(self) -> dict[str, mpmath.mpf]:
        return {k: mpmath.re(v) for k, v in self.values.items()}


@dataclass
class EigenReport:
    candidates: list[EigenCandidate]
    combination: dict[str, int]
    clusters: list[int] = field(default_factory=list)  # multiplicities > 1, if any


def multiplication_matrices(G: GroebnerBasis, variables: Sequence[str] | None = None,
                            basis: Sequence[Monomial] | None = None) -> list[MultiplicationMatrix]:
    basis = list(basis if basis is not None else standard_monomials(G))
    names = list(variables or G.vars.names)
    for h in names:
        G.vars.index(h)
    basis, tables = multiplication_tables(G, basis)
    return [MultiplicationMatrix(h, basis, tables[h]) for h in names]


def multiplication_matrix(G: GroebnerBasis, B: Sequence[Monomial], h: str) -> MultiplicationMatrix:
    if h not in G.vars:
        raise UsageError(f"unknown variable {h!r}")
    return multiplication_matrices(G, [h], B)[0]


def _sparse_matmul(a: list[dict], b: list[dict]) -> list[dict]:
    """Column-sparse product a*b."""
    out = []
    for col in b:
        acc: dict = {}
        for k, c in col.items():
            for i, v in a[k].items():
                x = acc.get(i, 0) + v * c
                if x:
                    acc[i] = x
                else:
                    acc.pop(i, None)
        out.append(acc)
    return out


def commute_exactly(a: MultiplicationMatrix, b: MultiplicationMatrix) -> bool:
    return _sparse_matmul(a.columns, b.columns) == _sparse_matmul(b.columns, a.columns)


def _to_mp_transpose(m: MultiplicationMatrix) -> mpmath.matrix:
    n = m.size
    out = mpmath.matrix(n, n)
    for j, col in enumerate(m.columns):
        for i, c in col.items():
            out[j, i] = mpmath.mpf(int(c.numerator)) / int(c.denominator)
    return out


def eigen_solve_system(matrices: Sequence[MultiplicationMatrix], eigen_tol=DEFAULT_EIGEN_TOL,
                       precision_bits: int = DEFAULT_PRECISION_BITS, seed: int = 0) -> EigenReport:
    if not matrices:
        raise UsageError("need at least one multiplication matrix")
    basis = matrices[0].basis
    for m in matrices[1:]:
        if m.basis != basis:
            raise UsageError("matrices act on different bases")
    for i in range(len(matrices)):
        for j in range(i + 1, len(matrices)):
            if not commute_exactly(matrices[i], matrices[j]):
                raise InconsistencyError(f"M_{matrices[i].variable} and M_{matrices[j].variable} do not commute")
    rng = random.Random(seed)
    weights = {m.variable: rng.randint(1, 97) for m in matrices}
    with mpmath.workprec(precision_bits):
        tol = mpmath.mpf(as_fraction(eigen_tol).numerator) / as_fraction(eigen_tol).denominator
        mats = {m.variable: _to_mp_transpose(m) for m in matrices}
        n = len(basis)
        combo = mpmath.matrix(n, n)
        for name, w in weights.items():
            combo += w * mats[name]
        evals, evecs = mpmath.eig(combo)
        # multiplicity diagnostics from clustering the combination's eigenvalues
        cluster_tol = mpmath.mpf(2) ** (-precision_bits // 4) * (1 + max(abs(e) for e in evals))
        mult = [sum(1 for f in evals if abs(e - f) <= cluster_tol) for e in evals]
        cands = []
        for k in range(n):
            v = evecs[:, k]
            vn = mpmath.sqrt(sum(abs(x) ** 2 for x in v))
            v = v / vn
            values, res = {}, {}
            for name, M in mats.items():
                Mv = M * v
                xi = sum(mpmath.conj(v[i]) * Mv[i] for i in range(n))
                values[name] = xi
                res[name] = mpmath.sqrt(sum(abs(Mv[i] - xi * v[i]) ** 2 for i in range(n)))
            real = all(abs(mpmath.im(x)) < tol for x in values.values())
            cands.append(EigenCandidate(values, res, "real" if real else "complex", mult[k], k))
    clusters = sorted({m for m in mult if m > 1})
    return EigenReport(cands, weights, clusters)


def solve_by_eigenvalues(G: GroebnerBasis, original: PolySystem | Sequence[Polynomial], tol=Fraction(1, 10 ** 8),
                         eigen_tol=DEFAULT_EIGEN_TOL, precision_bits: int = DEFAULT_PRECISION_BITS,
                         seed: int = 0) -> tuple[list[RealSolution], EigenReport]:
    """Real zeros of ``G`` by the eigenvalue route, verified against ``original``."""
    gens = original.polys if isinstance(original, PolySystem) else list(original)
    names = G.vars.names
    report = eigen_solve_system(multiplication_matrices(G), eigen_tol, precision_bits, seed)
    tol_f = as_fraction(tol)
    out = []
    with mpmath.workprec(precision_bits):
        tol_mp = mpmath.mpf(tol_f.numerator) / tol_f.denominator
        for c in report.candidates:
            if c.kind != "real":
                continue
            pt = c.real_values()
            res = residual(gens, pt, precision_bits)
            if res >= tol_mp:
                continue
            out.append(RealSolution({n: pt[n] for n in names}, res, f"eig:{c.index}", precision_bits))
    out.sort(key=lambda s: sort_key(s, names))
    return dedupe(out, tol), report


def compare_solution_sets(a: Sequence[RealSolution], b: Sequence[RealSolution], tol) -> tuple[bool, list[str]]:
    """Match two solution lists one-to-one in max-norm; returns (agree, diagnostics)."""
    tol = float(as_fraction(tol))
    unmatched = list(b)
    notes = []
    for s in a:
        hit = None
        for o in unmatched:
            if max(abs(float(s.values[k] - o.values[k])) for k in s.values) <= tol:
                hit = o
                break
        if hit is None:
            notes.append(f"{s.provenance} has no partner: {s.as_floats()}")
        else:
            unmatched.remove(hit)
    for o in unmatched:
        notes.append(f"{o.provenance} has no partner: {o.as_floats()}")
    return not notes, notes
