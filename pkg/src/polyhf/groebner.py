"""Buchberger's algorithm over the rationals, normal forms and quotient-ring bases.

Internally polynomials are ``dict`` monomial -> rational (gmpy2 ``mpq`` when
installed, :class:`Fraction` otherwise) and every basis element is kept
monic, so a reduction step touches only the divisor's terms.  Critical pairs are selected by
smallest lcm and pruned with the coprime criterion and the Gebauer-Moeller
update.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .polyring import (
    Monomial,
    MonomialOrder,
    Polynomial,
    UsageError,
    VarTable,
    mono_divides,
    mono_lcm,
    parse_polynomial,
)


class BudgetExceeded(RuntimeError):
    """A configured resource limit was hit; no partial result is returned."""


class DimensionError(ValueError):
    """The ideal is not zero-dimensional where a finite quotient is required."""


@dataclass(frozen=True)
class Budget:
    max_spairs: int | None = None
    max_terms: int | None = None


@dataclass
class PolySystem:
    polys: list[Polynomial]
    order: MonomialOrder

    def __post_init__(self):
        if not self.polys:
            raise UsageError("a polynomial system needs at least one generator")
        vt = self.order.var_table
        for p in self.polys:
            if p.vars != vt:
                raise UsageError(f"generator over ({p.vars}) but system order is over ({vt})")

    @property
    def vars(self) -> VarTable:
        return self.order.var_table

    def with_order(self, kind: str) -> "PolySystem":
        return PolySystem(list(self.polys), MonomialOrder(kind, self.vars))

    def to_dict(self) -> dict:
        return {
            "vars": list(self.vars.names),
            "order": self.order.kind,
            "polys": [p.to_str(self.order) for p in self.polys],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "PolySystem":
        try:
            vt = VarTable(data["vars"])
            order = MonomialOrder(data.get("order", "lex"), vt)
            polys = [parse_polynomial(s, vt) for s in data["polys"]]
        except KeyError as exc:
            raise UsageError(f"system document lacks field {exc}") from None
        return cls(polys, order)

    @classmethod
    def from_json(cls, text: str) -> "PolySystem":
        return cls.from_dict(json.loads(text))


def load_system(path: str) -> PolySystem:
    with open(path, encoding="utf-8") as fh:
        return PolySystem.from_json(fh.read())


def save_system(system: PolySystem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(system.to_json())


# ---------------------------------------------------------------- coefficient kernel

try:  # fast rationals when available; Fraction otherwise
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction


def _neg_key_fn(order: MonomialOrder):
    """Key where smaller means larger monomial (for min-heaps)."""
    if order.kind == "lex":
        return lambda m: tuple(-e for e in m)
    return lambda m: (-sum(m), tuple(reversed(m)))


def _to_q(p: Polynomial) -> dict:
    return {m: _Q(c.numerator, c.denominator) for m, c in p.terms.items()}


def _from_q(vt: VarTable, d: dict) -> Polynomial:
    return Polynomial(vt, {m: Fraction(int(c.numerator), int(c.denominator)) for m, c in d.items()})


class _Elem:
    __slots__ = ("terms", "lm", "idx")

    def __init__(self, terms: dict, lm: Monomial, idx: int):
        lc = terms[lm]
        if lc != 1:
            terms = {m: c / lc for m, c in terms.items()}
        self.terms = terms
        self.lm = lm
        self.idx = idx


class _Reducer:
    def __init__(self, order: MonomialOrder, budget: Budget):
        self.order = order
        self.nk = _neg_key_fn(order)
        self.key = order.key
        self.budget = budget

    def lm(self, d: dict) -> Monomial:
        return max(d, key=self.key)

    def find_divisor(self, m: Monomial, basis: Sequence[_Elem]) -> _Elem | None:
        # callers pass divisors sorted by ascending leading monomial; the
        # smallest usable divisor keeps coefficient growth down
        for g in basis:
            if all(a <= b for a, b in zip(g.lm, m)):
                return g
        return None

    def reduce(self, f: dict, basis: Sequence[_Elem]) -> dict:
        """Full reduction of ``f`` by monic ``basis`` elements."""
        basis = sorted(basis, key=lambda g: self.nk(g.lm), reverse=True)
        pending = dict(f)
        nk = self.nk
        heap = [(nk(m), m) for m in pending]
        heapq.heapify(heap)
        rem: dict = {}
        max_terms = self.budget.max_terms
        while heap:
            _, m = heapq.heappop(heap)
            c = pending.pop(m, None)
            if c is None:
                continue
            g = self.find_divisor(m, basis) if basis else None
            if g is None:
                rem[m] = c
                continue
            shift = tuple(x - y for x, y in zip(m, g.lm))
            glm = g.lm
            for gm, gc in g.terms.items():
                if gm is glm:
                    continue
                mm = tuple(x + y for x, y in zip(gm, shift))
                old = pending.get(mm)
                if old is None:
                    pending[mm] = -c * gc
                    heapq.heappush(heap, (nk(mm), mm))
                else:
                    v = old - c * gc
                    if v:
                        pending[mm] = v
                    else:
                        del pending[mm]
            if max_terms is not None and len(pending) + len(rem) > max_terms:
                raise BudgetExceeded(f"intermediate polynomial exceeded {max_terms} terms")
            if len(heap) > 4 * (len(pending) + 8):
                heap = [(nk(k), k) for k in pending]
                heapq.heapify(heap)
        return rem


def _spoly(f: _Elem, g: _Elem) -> dict:
    lcm = mono_lcm(f.lm, g.lm)
    sf = tuple(x - y for x, y in zip(lcm, f.lm))
    sg = tuple(x - y for x, y in zip(lcm, g.lm))
    out: dict = {}
    for m, c in f.terms.items():
        if m is f.lm:
            continue
        out[tuple(x + y for x, y in zip(m, sf))] = c
    for m, c in g.terms.items():
        if m is g.lm:
            continue
        mm = tuple(x + y for x, y in zip(m, sg))
        v = out.get(mm, 0) - c
        if v:
            out[mm] = v
        else:
            out.pop(mm, None)
    return out


def _coprime(a: Monomial, b: Monomial) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


# ---------------------------------------------------------------- public API

@dataclass
class GroebnerStats:
    pairs_total: int = 0
    pairs_reduced: int = 0
    zero_reductions: int = 0
    basis_size_max: int = 0


@dataclass
class GroebnerBasis:
    polys: list[Polynomial]
    order: MonomialOrder
    reduced: bool = True
    stats: GroebnerStats = field(default_factory=GroebnerStats, compare=False)

    @property
    def vars(self) -> VarTable:
        return self.order.var_table

    def leading_monomials(self) -> list[Monomial]:
        return [p.leading_monomial(self.order) for p in self.polys]

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroebnerBasis):
            return NotImplemented
        return self.order == other.order and self.polys == other.polys

    def to_system(self) -> PolySystem:
        return PolySystem(list(self.polys), self.order)

    def to_dict(self) -> dict:
        d = self.to_system().to_dict()
        d["reduced"] = self.reduced
        return d


def groebner_basis(F: PolySystem | Iterable[Polynomial], order: MonomialOrder | None = None,
                   budget: Budget | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``F``."""
    if isinstance(F, PolySystem):
        order = order or F.order
        gens = F.polys
    else:
        gens = list(F)
        if order is None:
            raise UsageError("an order is required when passing bare polynomials")
        PolySystem(gens, order)
    if not gens:
        raise UsageError("empty generator list")
    budget = budget or Budget()
    red = _Reducer(order, budget)
    stats = GroebnerStats()

    basis: list[_Elem] = []   # every element ever added
    active: list[_Elem] = []  # current G after GM pruning
    pairs: list = []          # heap of (neg lcm key, i, j, lcm)
    counter = 0

    def add(h: dict):
        nonlocal counter, active, pairs
        lm = red.lm(h)
        e = _Elem(h, lm, counter)
        counter += 1
        basis.append(e)
        # Gebauer-Moeller update
        cand = [(g, mono_lcm(g.lm, lm)) for g in active]
        keep: list = []
        while cand:
            g1, l1 = cand.pop(0)
            if _coprime(g1.lm, lm) or not (
                any(mono_divides(l2, l1) for _, l2 in cand) or any(mono_divides(l2, l1) for _, l2 in keep)
            ):
                keep.append((g1, l1))
        new_pairs = [(g, l) for g, l in keep if not _coprime(g.lm, lm)]
        # drop old pairs made redundant by the new element
        pruned = []
        for item in pairs:
            _, i, j, l = item
            gi, gj = basis[i], basis[j]
            if (mono_divides(lm, l) and mono_lcm(gi.lm, lm) != l and mono_lcm(gj.lm, lm) != l):
                continue
            pruned.append(item)
        if len(pruned) != len(pairs):
            heapq.heapify(pruned)
        pairs = pruned
        for g, l in new_pairs:
            heapq.heappush(pairs, (red.key(l), g.idx, e.idx, l))
            stats.pairs_total += 1
        active = [g for g in active if not mono_divides(lm, g.lm)] + [e]
        stats.basis_size_max = max(stats.basis_size_max, len(active))

    # seed with the inter-reduced generators
    seeds = []
    for p in gens:
        if p.terms:
            seeds.append(_to_q(p))
    seeds.sort(key=lambda d: red.nk(red.lm(d)), reverse=True)
    for d in seeds:
        r = red.reduce(d, active)
        if r:
            add(r)

    processed = 0
    while pairs:
        _, i, j, _l = heapq.heappop(pairs)
        processed += 1
        if budget.max_spairs is not None and processed > budget.max_spairs:
            raise BudgetExceeded(f"more than {budget.max_spairs} S-pairs were required")
        s = _spoly(basis[i], basis[j])
        stats.pairs_reduced += 1
        if not s:
            stats.zero_reductions += 1
            continue
        r = red.reduce(s, active)
        if not r:
            stats.zero_reductions += 1
            continue
        if all(not any(m) for m in r):
            # nonzero constant: the ideal is the whole ring
            add({order.var_table.zero_monomial(): 1})
            pairs = []
            break
        add(r)

    return GroebnerBasis(_reduce_basis(active, red, order), order, True, stats)


def _reduce_basis(active: list[_Elem], red: _Reducer, order: MonomialOrder) -> list[Polynomial]:
    # minimal basis
    minimal = []
    for e in active:
        if any(o is not e and mono_divides(o.lm, e.lm) and (o.lm != e.lm or o.idx < e.idx) for o in active):
            continue
        minimal.append(e)
    minimal.sort(key=lambda e: red.nk(e.lm))
    out = []
    for e in minimal:
        others = [o for o in minimal if o is not e]
        tail = {m: c for m, c in e.terms.items() if m is not e.lm}
        full = red.reduce(tail, others)
        full[e.lm] = _Q(1)
        out.append(_from_q(order.var_table, full))
    return out


def normal_form(p: Polynomial, G: GroebnerBasis | Sequence[Polynomial], order: MonomialOrder | None = None) -> Polynomial:
    """Fully reduced remainder of ``p`` modulo ``G``."""
    if isinstance(G, GroebnerBasis):
        order = G.order
        polys = G.polys
    else:
        polys = list(G)
        if order is None:
            raise UsageError("an order is required when passing bare polynomials")
    if p.vars != order.var_table:
        raise UsageError(f"polynomial over ({p.vars}) but basis over ({order.var_table})")
    red = _Reducer(order, Budget())
    elems = [_Elem(_to_q(g), g.leading_monomial(order), k) for k, g in enumerate(polys) if g.terms]
    if not p.terms:
        return p
    return _from_q(order.var_table, red.reduce(_to_q(p), elems))


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder) -> Polynomial:
    lf, lg = f.leading_monomial(order), g.leading_monomial(order)
    lcm = mono_lcm(lf, lg)
    cf, cg = f.terms[lf], g.terms[lg]
    return (f.mul_monomial(tuple(x - y for x, y in zip(lcm, lf)), 1 / cf)
            - g.mul_monomial(tuple(x - y for x, y in zip(lcm, lg)), 1 / cg))


def is_trivial_ideal(G: GroebnerBasis) -> bool:
    return len(G.polys) == 1 and G.polys[0].is_constant() and not G.polys[0].is_zero()


def is_zero_dimensional(G: GroebnerBasis) -> bool:
    if is_trivial_ideal(G):
        raise UsageError("the unit ideal has no zeros; zero-dimensionality is undefined here")
    n = len(G.vars)
    pure = [False] * n
    for lm in G.leading_monomials():
        nz = [i for i, e in enumerate(lm) if e]
        if len(nz) == 1:
            pure[nz[0]] = True
    return all(pure)


def standard_monomials(G: GroebnerBasis) -> list[Monomial]:
    """Monomials outside the leading-term ideal, sorted descending in the basis order."""
    if is_trivial_ideal(G):
        return []
    if not is_zero_dimensional(G):
        raise DimensionError("the staircase is infinite: ideal is not zero-dimensional")
    lms = G.leading_monomials()
    n = len(G.vars)
    out: list[Monomial] = []

    def divisible(m) -> bool:
        return any(all(a <= b for a, b in zip(l, m)) for l in lms)

    def walk(prefix: list, i: int):
        if i == n:
            out.append(tuple(prefix))
            return
        k = 0
        while True:
            cand = prefix + [k] + [0] * (n - i - 1)
            if divisible(cand):
                break
            walk(prefix + [k], i + 1)
            k += 1

    walk([], 0)
    out.sort(key=G.order.key, reverse=True)
    return out


def ideal_contains(G: GroebnerBasis, p: Polynomial) -> bool:
    return normal_form(p, G).is_zero()


# ---------------------------------------------------------------- order conversion

def _nf_vector(d: dict, elems: Sequence[_Elem], red: _Reducer, index: dict) -> dict:
    r = red.reduce(d, elems)
    return {index[m]: c for m, c in r.items()}


def multiplication_tables(G: GroebnerBasis, basis: Sequence[Monomial] | None = None) -> tuple[list, dict]:
    """For each variable, the map basis position -> sparse coordinate vector of NF(x * b)."""
    basis = list(basis if basis is not None else standard_monomials(G))
    index = {m: k for k, m in enumerate(basis)}
    red = _Reducer(G.order, Budget())
    elems = [_Elem(_to_q(g), g.leading_monomial(G.order), k) for k, g in enumerate(G.polys)]
    tables = {}
    for i, name in enumerate(G.vars.names):
        cols = []
        for b in basis:
            m = tuple(e + (1 if k == i else 0) for k, e in enumerate(b))
            if m in index:
                cols.append({index[m]: _Q(1)})
            else:
                cols.append(_nf_vector({m: _Q(1)}, elems, red, index))
        tables[name] = cols
    return basis, tables


def fglm(G: GroebnerBasis, target: MonomialOrder) -> GroebnerBasis:
    """Convert a zero-dimensional reduced basis to another monomial order."""
    if target.var_table != G.vars:
        raise UsageError("target order must use the same variable table")
    if is_trivial_ideal(G):
        return GroebnerBasis([Polynomial.constant(G.vars, 1)], target, True)
    basis, tables = multiplication_tables(G)
    return fglm_tables(G.vars, basis, tables, target)


def fglm_tables(vt: VarTable, basis: Sequence[Monomial], tables: dict, target: MonomialOrder,
                project=None) -> GroebnerBasis:
    """FGLM on a quotient given by multiplication tables.

    With ``project`` (a linear map on coordinate vectors whose kernel is an
    ideal of the quotient) the result is the basis of the larger ideal
    ``{h : project(NF(h)) = 0}``.
    """
    G_vars = vt
    basis = list(basis)
    names = vt.names
    n = len(names)
    tkey = target.key
    one = G_vars.zero_monomial()
    one_vec = {basis.index(one): _Q(1)}

    new_std: list[Monomial] = []         # standard monomials for target order
    std_vec: dict[Monomial, dict] = {}   # their coordinate vectors
    rows: list[tuple[int, dict, dict]] = []  # (pivot, vector, combo over new_std positions)
    lead: list[Monomial] = []
    out: list[Polynomial] = []
    cand: dict[Monomial, tuple[Monomial, int]] = {one: (one, -1)}

    while cand:
        m = min(cand, key=tkey)
        src, var_i = cand.pop(m)
        if any(all(a <= b for a, b in zip(l, m)) for l in lead):
            continue
        if var_i < 0:
            vec = dict(one_vec)
        else:
            vec = {}
            for k, c in std_vec[src].items():
                for kk, cc in tables[names[var_i]][k].items():
                    v = vec.get(kk, 0) + c * cc
                    if v:
                        vec[kk] = v
                    else:
                        vec.pop(kk, None)
        combo: dict[int, object] = {}
        w = dict(project(vec)) if project is not None else dict(vec)
        for piv, rv, rc in rows:
            a = w.get(piv)
            if not a:
                continue
            for kk, cc in rv.items():
                v = w.get(kk, 0) - a * cc
                if v:
                    w[kk] = v
                else:
                    w.pop(kk, None)
            for kk, cc in rc.items():
                combo[kk] = combo.get(kk, 0) + a * cc
        if not w:
            # m - sum combo[k] * new_std[k] lies in the ideal
            terms = {m: Fraction(1)}
            for k, c in combo.items():
                if c:
                    terms[new_std[k]] = -Fraction(int(c.numerator), int(c.denominator))
            out.append(Polynomial(G_vars, terms))
            lead.append(m)
            if m == one:
                break
            continue
        pos = len(new_std)
        new_std.append(m)
        std_vec[m] = vec
        piv = min(w)
        inv = 1 / w[piv]
        rv = {k: c * inv for k, c in w.items()}
        rc = {k: -c * inv for k, c in combo.items() if c}
        rc[pos] = inv
        # keep rows fully reduced on their pivots
        rows = [(p0, *_eliminate(v0, c0, piv, rv, rc)) for p0, v0, c0 in rows]
        rows.append((piv, rv, rc))
        for i in range(n):
            mm = tuple(e + (1 if k == i else 0) for k, e in enumerate(m))
            if mm not in cand:
                cand[mm] = (m, i)
    if lead and lead[-1] == one:
        return GroebnerBasis([Polynomial.constant(G_vars, 1)], target, True)
    out.sort(key=lambda p: tkey(p.leading_monomial(target)), reverse=True)
    return GroebnerBasis(out, target, True)


def _eliminate(v0: dict, c0: dict, piv: int, rv: dict, rc: dict) -> tuple[dict, dict]:
    a = v0.get(piv)
    if not a:
        return v0, c0
    v = dict(v0)
    for k, c in rv.items():
        x = v.get(k, 0) - a * c
        if x:
            v[k] = x
        else:
            v.pop(k, None)
    cc = dict(c0)
    for k, c in rc.items():
        x = cc.get(k, 0) - a * c
        if x:
            cc[k] = x
        else:
            cc.pop(k, None)
    return v, cc


def lex_basis(F: PolySystem | Iterable[Polynomial], var_table: VarTable | None = None,
              budget: Budget | None = None) -> GroebnerBasis:
    """Reduced lex basis, via grevlex Buchberger plus FGLM when the ideal is zero-dimensional."""
    gens = F.polys if isinstance(F, PolySystem) else list(F)
    vt = var_table or gens[0].vars
    G = groebner_basis(gens, MonomialOrder("grevlex", vt), budget)
    target = MonomialOrder("lex", vt)
    if is_trivial_ideal(G):
        return GroebnerBasis(list(G.polys), target, True, G.stats)
    if not is_zero_dimensional(G):
        return groebner_basis(gens, target, budget)
    out = fglm(G, target)
    out.stats = G.stats
    return out
