"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` lives over a :class:`VarTable`, an ordered tuple of
variable names.  The table order doubles as the lexicographic elimination
order: the first variable is the largest.  Monomials are exponent tuples
aligned with the table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .numkernel import as_fraction, format_rational

Monomial = tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


class UsageError(ValueError):
    """Caller violated an operation's preconditions (bad variable, table mismatch...)."""


@dataclass(frozen=True)
class VarTable:
    names: tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not names:
            raise UsageError("variable table must be nonempty")
        for n in names:
            if not _IDENT.match(n):
                raise UsageError(f"invalid variable name {n!r}")
        if len(set(names)) != len(names):
            raise UsageError(f"duplicate variables in {names}")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UsageError(f"unknown variable {name!r} (table {self.names})") from None

    def zero_monomial(self) -> Monomial:
        return (0,) * len(self.names)

    def var_monomial(self, name: str) -> Monomial:
        e = [0] * len(self.names)
        e[self.index(name)] = 1
        return tuple(e)

    def __str__(self) -> str:
        return ", ".join(self.names)


def _lex_key(m: Monomial) -> Monomial:
    return m


def _grevlex_key(m: Monomial) -> tuple:
    return (sum(m), tuple(-e for e in reversed(m)))


@dataclass(frozen=True)
class MonomialOrder:
    """``kind`` is ``"lex"`` or ``"grevlex"``; larger key means larger monomial."""

    kind: str
    var_table: VarTable

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex"):
            raise UsageError(f"unknown monomial order {self.kind!r}")

    @property
    def key(self) -> Callable[[Monomial], tuple]:
        return _lex_key if self.kind == "lex" else _grevlex_key

    def compare(self, m1: Monomial, m2: Monomial) -> int:
        k1, k2 = self.key(m1), self.key(m2)
        return (k1 > k2) - (k1 < k2)


def lex(*names: str) -> MonomialOrder:
    return MonomialOrder("lex", VarTable(names))


def grevlex(*names: str) -> MonomialOrder:
    return MonomialOrder("grevlex", VarTable(names))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True if ``a`` divides ``b``."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(b: Monomial, a: Monomial) -> Monomial:
    return tuple(y - x for x, y in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(x, y) for x, y in zip(a, b))


class Polynomial:
    """Immutable sparse polynomial; ``terms`` maps monomials to nonzero Fractions."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, var_table: VarTable | Iterable[str], terms: Mapping[Monomial, object] | None = None):
        if not isinstance(var_table, VarTable):
            var_table = VarTable(var_table)
        self.vars = var_table
        clean: dict[Monomial, Fraction] = {}
        n = len(var_table)
        for m, c in (terms or {}).items():
            if len(m) != n:
                raise UsageError(f"monomial {m} does not match table of size {n}")
            c = as_fraction(c)
            if c:
                clean[tuple(m)] = c
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, var_table) -> "Polynomial":
        return cls(var_table)

    @classmethod
    def constant(cls, var_table, c) -> "Polynomial":
        vt = var_table if isinstance(var_table, VarTable) else VarTable(var_table)
        return cls(vt, {vt.zero_monomial(): c})

    @classmethod
    def var(cls, var_table, name: str) -> "Polynomial":
        vt = var_table if isinstance(var_table, VarTable) else VarTable(var_table)
        return cls(vt, {vt.var_monomial(name): 1})

    @classmethod
    def _raw(cls, var_table: VarTable, terms: dict) -> "Polynomial":
        p = cls.__new__(cls)
        p.vars = var_table
        p.terms = terms
        p._hash = None
        return p

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> Fraction:
        return self.terms.get(self.vars.zero_monomial(), Fraction(0))

    def degree(self, name: str | None = None) -> int:
        """Total degree, or the degree in one variable; ``-1`` for zero."""
        if not self.terms:
            return -1
        if name is None:
            return max(sum(m) for m in self.terms)
        i = self.vars.index(name)
        return max(m[i] for m in self.terms)

    def variables(self) -> tuple[str, ...]:
        """Names of variables that actually occur, in table order."""
        used = [False] * len(self.vars)
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    used[i] = True
        return tuple(n for n, u in zip(self.vars.names, used) if u)

    def sorted_terms(self, order: MonomialOrder | None = None) -> list[tuple[Monomial, Fraction]]:
        key = (order or MonomialOrder("lex", self.vars)).key
        return sorted(self.terms.items(), key=lambda mc: key(mc[0]), reverse=True)

    def leading_monomial(self, order: MonomialOrder) -> Monomial:
        if not self.terms:
            raise UsageError("zero polynomial has no leading monomial")
        return max(self.terms, key=order.key)

    def leading_coefficient(self, order: MonomialOrder) -> Fraction:
        return self.terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder) -> "Polynomial":
        return self.scale(1 / self.leading_coefficient(order))

    def primitive_integer(self, order: MonomialOrder | None = None) -> "Polynomial":
        """Scale to coprime integer coefficients with positive leading coefficient."""
        if not self.terms:
            return self
        from math import gcd, lcm

        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        num = 0
        for c in self.terms.values():
            num = gcd(num, int(c * den))
        factor = Fraction(den, num)
        if order is not None and self.leading_coefficient(order) < 0:
            factor = -factor
        return self.scale(factor)

    # arithmetic
    def _check(self, other: "Polynomial") -> None:
        if other.vars != self.vars:
            raise UsageError(f"variable tables differ: ({self.vars}) vs ({other.vars})")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.vars, as_fraction(other))

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Polynomial._raw(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial._raw(self.vars, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = as_fraction(c)
        if not c:
            return Polynomial._raw(self.vars, {})
        return Polynomial._raw(self.vars, {m: v * c for m, v in self.terms.items()})

    def __truediv__(self, c) -> "Polynomial":
        return self.scale(1 / as_fraction(c))

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise UsageError("negative powers are not polynomials")
        result = Polynomial.constant(self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def mul_monomial(self, m: Monomial, c=1) -> "Polynomial":
        c = as_fraction(c)
        return Polynomial._raw(self.vars, {mono_mul(k, m): v * c for k, v in self.terms.items()})

    # equality is structural on (table, coefficient map)
    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.vars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r}, vars={self.vars.names})"

    def __str__(self) -> str:
        return self.to_str()

    # calculus and composition
    def diff(self, name: str) -> "Polynomial":
        return differentiate(self, name)

    def subs(self, bindings: Mapping[str, object]) -> "Polynomial":
        return substitute(self, bindings)

    def __call__(self, point: Mapping[str, object]):
        return evaluate(self, point)

    def change_vars(self, var_table: VarTable | Iterable[str]) -> "Polynomial":
        """Re-express over another table that contains every used variable."""
        if not isinstance(var_table, VarTable):
            var_table = VarTable(var_table)
        if var_table == self.vars:
            return self
        idx = []
        for n in self.vars.names:
            idx.append(var_table.names.index(n) if n in var_table else None)
        out = {}
        for m, c in self.terms.items():
            e = [0] * len(var_table)
            for i, k in enumerate(m):
                if k:
                    if idx[i] is None:
                        raise UsageError(f"variable {self.vars.names[i]!r} missing from target table")
                    e[idx[i]] = k
            out[tuple(e)] = c
        return Polynomial._raw(var_table, out)

    def coefficients_in(self, name: str) -> dict[int, "Polynomial"]:
        """Split as sum_k c_k * name^k with c_k free of ``name``."""
        i = self.vars.index(name)
        out: dict[int, dict] = {}
        for m, c in self.terms.items():
            k = m[i]
            mm = m[:i] + (0,) + m[i + 1:]
            out.setdefault(k, {})[mm] = c
        return {k: Polynomial._raw(self.vars, t) for k, t in out.items()}

    def to_str(self, order: MonomialOrder | None = None) -> str:
        return format_polynomial(self, order)


# ---------------------------------------------------------------- operations

def poly_arith(op: str, p: Polynomial, q) -> Polynomial:
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    if op == "scale":
        if isinstance(q, Polynomial):
            raise UsageError("scale takes a rational")
        return p.scale(q)
    raise UsageError(f"unknown op {op!r}")


def differentiate(p: Polynomial, name: str) -> Polynomial:
    i = p.vars.index(name)
    out = {}
    for m, c in p.terms.items():
        k = m[i]
        if k:
            out[m[:i] + (k - 1,) + m[i + 1:]] = c * k
    return Polynomial._raw(p.vars, out)


def substitute(p: Polynomial, bindings: Mapping[str, object]) -> Polynomial:
    """Replace variables by polynomials (or rationals) over the same table."""
    if not bindings:
        return p
    idx = {}
    for name, val in bindings.items():
        i = p.vars.index(name)
        if isinstance(val, Polynomial):
            if val.vars != p.vars:
                raise UsageError(f"binding for {name!r} lives over ({val.vars}), expected ({p.vars})")
        else:
            val = Polynomial.constant(p.vars, val)
        idx[i] = val
    powers: dict[tuple[int, int], Polynomial] = {}

    def power(i: int, k: int) -> Polynomial:
        key = (i, k)
        if key not in powers:
            powers[key] = idx[i] if k == 1 else power(i, k - 1) * idx[i]
        return powers[key]

    result = Polynomial._raw(p.vars, {})
    acc: dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        kept = tuple(0 if i in idx else e for i, e in enumerate(m))
        term = Polynomial._raw(p.vars, {kept: c})
        for i, e in enumerate(m):
            if e and i in idx:
                term = term * power(i, e)
        for mm, cc in term.terms.items():
            acc[mm] = acc.get(mm, 0) + cc
    result = Polynomial._raw(p.vars, {m: c for m, c in acc.items() if c})
    return result


def evaluate(p: Polynomial, point: Mapping[str, object]):
    """Evaluate at a full assignment.  Exact for rational inputs; works for any
    numeric type (e.g. ``mpf``) supporting ``+`` and ``*``."""
    names = p.vars.names
    used = p.variables()
    missing = [n for n in used if n not in point]
    if missing:
        raise UsageError(f"unbound variables {missing}")
    vals = []
    exact = True
    for n in names:
        v = point.get(n, 0)
        if isinstance(v, (int, Fraction, str)):
            v = as_fraction(v)
        else:
            exact = False
        vals.append(v)
    total = Fraction(0) if exact else 0
    pow_cache: dict[tuple[int, int], object] = {}
    for m, c in p.terms.items():
        t = c if exact else _to_num(c, vals)
        for i, e in enumerate(m):
            if e:
                key = (i, e)
                if key not in pow_cache:
                    pow_cache[key] = vals[i] ** e
                t = t * pow_cache[key]
        total = total + t
    return total


def _to_num(c: Fraction, vals):
    for v in vals:
        if not isinstance(v, Fraction):
            try:
                return type(v)(c.numerator) / c.denominator
            except TypeError:
                break
    return c.numerator / c.denominator


# ---------------------------------------------------------------- text syntax

def format_polynomial(p: Polynomial, order: MonomialOrder | None = None) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for m, c in p.sorted_terms(order):
        factors = []
        for name, e in zip(p.vars.names, m):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if factors:
            body = "*".join(factors)
            if mag != 1:
                body = f"{format_rational(mag)}*{body}"
        else:
            body = format_rational(mag)
        sign = "-" if c < 0 else "+"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(f"{sign}{body}")
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt or mt.end() == pos:
            raise UsageError(f"cannot parse polynomial near {text[pos:pos + 20]!r}")
        num, name, op = mt.groups()
        if num is not None:
            toks.append(("num", Fraction(num)))
        elif name is not None:
            toks.append(("var", name))
        else:
            toks.append(("op", "^" if op == "**" else op))
        pos = mt.end()
    return toks


class _Parser:
    def __init__(self, toks, var_table: VarTable):
        self.toks = toks
        self.i = 0
        self.vt = var_table

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> Polynomial:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            acc = self.term()
            if val == "-":
                acc = -acc
        else:
            acc = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self) -> Polynomial:
        acc = self.power()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.power()
            elif kind == "op" and val == "/":
                self.take()
                den = self.power()
                if not den.is_constant() or den.is_zero():
                    raise UsageError("division only by nonzero constants")
                acc = acc.scale(1 / den.constant_term())
            else:
                return acc

    def power(self) -> Polynomial:
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            k2, v2 = self.peek()
            if k2 == "op" and v2 == "-":
                raise UsageError("negative exponents are not allowed")
            k2, v2 = self.take()
            if k2 != "num" or v2.denominator != 1:
                raise UsageError("exponent must be a nonnegative integer")
            return base ** (sign * int(v2))
        return base

    def atom(self) -> Polynomial:
        kind, val = self.take()
        if kind == "num":
            return Polynomial.constant(self.vt, val)
        if kind == "var":
            if val not in self.vt:
                raise UsageError(f"unknown variable {val!r} (table {self.vt.names})")
            return Polynomial.var(self.vt, val)
        if kind == "op" and val == "(":
            inner = self.expr()
            k2, v2 = self.take()
            if v2 != ")":
                raise UsageError("unbalanced parentheses")
            return inner
        if kind == "op" and val == "-":
            return -self.atom()
        raise UsageError(f"unexpected token {val!r}")


def parse_polynomial(text: str, var_table: VarTable | Iterable[str]) -> Polynomial:
    """Parse ``32*s*u*v*r^4-336*s*u*v*r^3`` style text.  Decimal literals are
    read exactly (``1.4`` is ``7/5``); ``**`` is accepted as ``^``."""
    if not isinstance(var_table, VarTable):
        var_table = VarTable(var_table)
    toks = _tokenize(text)
    if not toks:
        raise UsageError("empty polynomial text")
    parser = _Parser(toks, var_table)
    p = parser.expr()
    if parser.i != len(toks):
        raise UsageError(f"trailing input in {text!r}")
    return p


def polys(var_table, *texts: str) -> list[Polynomial]:
    vt = var_table if isinstance(var_table, VarTable) else VarTable(var_table)
    return [parse_polynomial(t, vt) for t in texts]
