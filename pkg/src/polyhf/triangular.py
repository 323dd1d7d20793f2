"""Split a zero-dimensional lex basis into triangular chains.

Variables are solved innermost first: the last variable of the table is
level 1.  At each level the basis element with that main variable and the
smallest leading monomial is a chain candidate.  The ideal is split on its
leading coefficient (where it vanishes vs. where it is invertible) and on
its derivative in the level variable (multiple vs. simple fibre roots), so
that every accepted chain

* has leading coefficients that never vanish on its zeros, and
* specializes at each of its zeros to polynomials with simple roots,

which is what numeric back-substitution needs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .groebner import (
    Budget,
    GroebnerBasis,
    PolySystem,
    fglm_tables,
    groebner_basis,
    is_trivial_ideal,
    is_zero_dimensional,
    lex_basis,
    multiplication_tables,
    standard_monomials,
)
from .polyring import MonomialOrder, Polynomial, UsageError, VarTable, differentiate, parse_polynomial


@dataclass
class TriangularSet:
    """Chain t_1..t_n; ``t_i`` has main variable ``solve_order[i]``."""

    chain: list[Polynomial]
    solve_order: tuple[str, ...]
    var_table: VarTable

    def __len__(self) -> int:
        return len(self.chain)

    def to_dict(self) -> dict:
        order = MonomialOrder("lex", self.var_table)
        return {"solve_order": list(self.solve_order), "chain": [p.to_str(order) for p in self.chain]}

    @classmethod
    def from_dict(cls, data: dict, var_table: VarTable) -> "TriangularSet":
        return cls([parse_polynomial(s, var_table) for s in data["chain"]], tuple(data["solve_order"]), var_table)

    def degrees(self) -> list[int]:
        return [p.degree(x) for p, x in zip(self.chain, self.solve_order)]


@dataclass
class TriangularDecomposition:
    sets: list[TriangularSet]
    var_table: VarTable
    overlaps: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def to_dict(self) -> dict:
        return {
            "vars": list(self.var_table.names),
            "solve_order": list(reversed(self.var_table.names)),
            "sets": [s.to_dict() for s in self.sets],
            "overlaps": [list(p) for p in self.overlaps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "TriangularDecomposition":
        vt = VarTable(data["vars"])
        return cls([TriangularSet.from_dict(s, vt) for s in data["sets"]], vt,
                   [tuple(p) for p in data.get("overlaps", [])])


def main_variable_index(p: Polynomial) -> int:
    """Index of the largest (first in the table) variable occurring in ``p``."""
    best = None
    for m in p.terms:
        for i, e in enumerate(m):
            if e:
                if best is None or i < best:
                    best = i
                break
    if best is None:
        raise UsageError("constants have no main variable")
    return best


def _lex(vt: VarTable) -> MonomialOrder:
    return MonomialOrder("lex", vt)


def saturate(G: GroebnerBasis, f: Polynomial, budget: Budget | None = None) -> GroebnerBasis:
    """Lex basis of G : f^inf, by eliminating an extra variable y with 1 - y*f."""
    vt = G.vars
    y = "y"
    while y in vt:
        y += "y"
    ext = VarTable((y,) + vt.names)
    gens = [g.change_vars(ext) for g in G.polys]
    fy = f.change_vars(ext)
    gens.append(Polynomial.constant(ext, 1) - Polynomial.var(ext, y) * fy)
    E = lex_basis(gens, ext, budget)
    keep = [g for g in E.polys if g.degree(y) <= 0]
    if not keep:
        return GroebnerBasis([Polynomial.constant(vt, 1)], _lex(vt), True)
    return GroebnerBasis([g.change_vars(vt) for g in keep], _lex(vt), True)


# ---------------------------------------------------------------- quotient linear algebra

def _axpy(w: dict, a, v: dict) -> None:
    """w -= a * v, in place, dropping zeros."""
    for k, c in v.items():
        x = w.get(k, 0) - a * c
        if x:
            w[k] = x
        else:
            w.pop(k, None)


class _Echelon:
    """Incrementally reduced row space of sparse vectors."""

    def __init__(self):
        self.rows: dict[int, dict] = {}

    def reduce(self, v: dict) -> dict:
        # rows are kept reduced against each other, so one pass suffices
        w = dict(v)
        for piv in [k for k in w if k in self.rows]:
            _axpy(w, w[piv], self.rows[piv])
        return w

    def add(self, v: dict) -> bool:
        w = self.reduce(v)
        if not w:
            return False
        piv = min(w)
        inv = 1 / w[piv]
        row = {k: c * inv for k, c in w.items()}
        for p, r in self.rows.items():
            if piv in r:
                _axpy(r, r[piv], row)
        self.rows[piv] = row
        return True

    def __len__(self) -> int:
        return len(self.rows)


class _Quotient:
    """Multiplication structure of Q[x]/G for a zero-dimensional basis G."""

    def __init__(self, G: GroebnerBasis):
        self.G = G
        self.basis, self.tables = multiplication_tables(G, standard_monomials(G))
        self.dim = len(self.basis)

    def _times_var(self, v: dict, name: str) -> dict:
        out: dict = {}
        table = self.tables[name]
        for k, c in v.items():
            for kk, cc in table[k].items():
                x = out.get(kk, 0) + c * cc
                if x:
                    out[kk] = x
                else:
                    out.pop(kk, None)
        return out

    def matrix(self, f: Polynomial) -> list[dict]:
        """Columns of multiplication by f, built from the variable tables."""
        from .groebner import _Q

        names = self.G.vars.names
        cols = []
        for j in range(self.dim):
            acc: dict = {}
            for mono, c in f.terms.items():
                v = {j: _Q(1)}
                for name, e in zip(names, mono):
                    for _ in range(e):
                        v = self._times_var(v, name)
                _axpy(acc, -_Q(c.numerator) / c.denominator, v)
            cols.append(acc)
        return cols


def _apply(cols: list[dict], v: dict) -> dict:
    out: dict = {}
    for j, c in v.items():
        _axpy(out, -c, cols[j])
    return out


def _matmul(a: list[dict], b: list[dict]) -> list[dict]:
    return [_apply(a, col) for col in b]


def _rank(cols: list[dict]) -> int:
    e = _Echelon()
    for c in cols:
        e.add(c)
    return len(e)


def split_ideal(G: GroebnerBasis, f: Polynomial) -> tuple[GroebnerBasis, GroebnerBasis] | None:
    """(G + <f>, G : f^inf) as lex bases, or None when f is invertible modulo G.

    Both come from FGLM on the quotient of G with a projected dependency
    test: G + <f> is the kernel of A -> A / fA and the saturation is the
    kernel of the stable power of multiplication by f.
    """
    Q = _Quotient(G)
    M = Q.matrix(f)
    image = _Echelon()
    for c in M:
        image.add(c)
    if len(image) == Q.dim:
        return None
    lex = MonomialOrder("lex", G.vars)
    ext = fglm_tables(G.vars, Q.basis, Q.tables, lex, image.reduce)
    P, rank = M, len(image)
    while True:
        P2 = _matmul(M, P)
        r2 = _rank(P2)
        if r2 == rank:
            break
        P, rank = P2, r2
    sat = fglm_tables(G.vars, Q.basis, Q.tables, lex, lambda v: _apply(P, v))
    return ext, sat


def decompose_triangular(G: GroebnerBasis, budget: Budget | None = None,
                         split_multiple_roots: bool = True) -> TriangularDecomposition:
    """Triangular sets whose zero sets union to the variety of ``G``."""
    if G.order.kind != "lex":
        raise UsageError("triangular decomposition needs a lex basis")
    if is_trivial_ideal(G):
        return TriangularDecomposition([], G.vars)
    if not is_zero_dimensional(G):
        raise UsageError("triangular decomposition needs a zero-dimensional ideal")
    vt = G.vars
    n = len(vt)
    solve_order = tuple(reversed(vt.names))
    chains: dict[str, TriangularSet] = {}

    def level_element(J: GroebnerBasis, idx: int) -> Polynomial:
        cands = [g for g in J.polys if main_variable_index(g) == idx]
        if not cands:
            raise UsageError(f"no basis element with main variable {vt.names[idx]!r}")
        order = J.order
        return min(cands, key=lambda g: order.key(g.leading_monomial(order)))

    def work(J: GroebnerBasis):
        if is_trivial_ideal(J):
            return
        chain = []
        for level in range(n):
            idx = n - 1 - level
            x = vt.names[idx]
            h = level_element(J, idx)
            d = h.degree(x)
            lc = h.coefficients_in(x)[d]
            parts = split_ideal(J, lc) if not lc.is_constant() else None
            if parts is None and split_multiple_roots and d > 1:
                parts = split_ideal(J, differentiate(h, x))
            if parts is not None:
                for part in parts:
                    work(part)
                return
            chain.append(h)
        ts = TriangularSet(chain, solve_order, vt)
        key = json.dumps(ts.to_dict(), sort_keys=True)
        chains.setdefault(key, ts)

    work(G)
    sets = [chains[k] for k in sorted(chains)]
    return TriangularDecomposition(sets, vt, _overlaps(sets, budget))


def _overlaps(sets: list[TriangularSet], budget: Budget | None) -> list[tuple[int, int]]:
    out = []
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            vt = sets[i].var_table
            G = groebner_basis(sets[i].chain + sets[j].chain, MonomialOrder("grevlex", vt), budget)
            if not is_trivial_ideal(G):
                out.append((i, j))
    return out


def decompose_system(F: PolySystem | list[Polynomial], budget: Budget | None = None) -> TriangularDecomposition:
    """Lex basis then decomposition, for callers holding raw generators."""
    return decompose_triangular(lex_basis(F, budget=budget), budget)
