"""Analytic expression trees with symbolic differentiation and Taylor polynomialization.

Nodes are frozen dataclasses with cached hashes so repeated derivatives share
subtrees; evaluation walks the DAG once with a memo table.  Constructors
fold constants and drop neutral elements, which keeps fourth derivatives
of the molecular integrals to a manageable size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import mpmath

from .numkernel import (
    DEFAULT_PRECISION_BITS,
    DomainError,
    as_fraction,
    rationalize,
    to_bigfloat,
)
from .polyring import Polynomial, UsageError, VarTable


class SymExpr:
    def _key(self) -> tuple:
        return tuple(getattr(self, f) for f in self.__dataclass_fields__)

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    # operator sugar
    def __add__(self, other):
        return add(self, lift(other))

    def __radd__(self, other):
        return add(lift(other), self)

    def __sub__(self, other):
        return add(self, neg(lift(other)))

    def __rsub__(self, other):
        return add(lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, lift(other))

    def __rmul__(self, other):
        return mul(lift(other), self)

    def __truediv__(self, other):
        return div(self, lift(other))

    def __rtruediv__(self, other):
        return div(lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def diff(self, name: str) -> "SymExpr":
        return _diff(self, name)

    def subs(self, bindings: Mapping[str, object]) -> "SymExpr":
        return substitute_expr(self, {k: lift(v) for k, v in bindings.items()})

    def free_vars(self) -> frozenset[str]:
        return _free(self)

    def evaluate(self, point: Mapping[str, object], precision_bits: int = DEFAULT_PRECISION_BITS):
        return evaluate_expr(self, point, precision_bits)


@dataclass(frozen=True, eq=False)
class Const(SymExpr):
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, eq=False)
class Var(SymExpr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class EulerGamma(SymExpr):
    def __str__(self):
        return "euler_gamma"


@dataclass(frozen=True, eq=False)
class Add(SymExpr):
    args: tuple

    def __str__(self):
        return "(" + " + ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, eq=False)
class Mul(SymExpr):
    args: tuple

    def __str__(self):
        return "*".join(map(str, self.args))


@dataclass(frozen=True, eq=False)
class Div(SymExpr):
    num: SymExpr
    den: SymExpr

    def __str__(self):
        return f"({self.num})/({self.den})"


@dataclass(frozen=True, eq=False)
class Pow(SymExpr):
    base: SymExpr
    exponent: Fraction

    def __str__(self):
        return f"({self.base})^({self.exponent})"


@dataclass(frozen=True, eq=False)
class Exp(SymExpr):
    arg: SymExpr

    def __str__(self):
        return f"exp({self.arg})"


@dataclass(frozen=True, eq=False)
class Log(SymExpr):
    arg: SymExpr

    def __str__(self):
        return f"log({self.arg})"


@dataclass(frozen=True, eq=False)
class Ei(SymExpr):
    """Exponential integral Ei(x) = -PV int_{-x}^inf e^{-t}/t dt."""

    arg: SymExpr

    def __str__(self):
        return f"Ei({self.arg})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
GAMMA = EulerGamma()


def const(x) -> Const:
    return Const(as_fraction(x))


def var(name: str) -> Var:
    return Var(name)


def lift(x) -> SymExpr:
    if isinstance(x, SymExpr):
        return x
    return const(x)


# ------------------------------------------------------------ smart builders

def add(*terms: SymExpr) -> SymExpr:
    flat = []
    c = Fraction(0)
    for t in terms:
        parts = t.args if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Const):
                c += p.value
            else:
                flat.append(p)
    if c:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: SymExpr) -> SymExpr:
    flat = []
    c = Fraction(1)
    for f in factors:
        parts = f.args if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Const):
                c *= p.value
            else:
                flat.append(p)
    if not c:
        return ZERO
    if not flat:
        return Const(c)
    if c != 1:
        flat.insert(0, Const(c))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e: SymExpr) -> SymExpr:
    return mul(Const(Fraction(-1)), e)


def div(num: SymExpr, den: SymExpr) -> SymExpr:
    if isinstance(den, Const):
        if not den.value:
            raise DomainError("division by the constant zero")
        return mul(Const(1 / den.value), num)
    if isinstance(num, Const) and not num.value:
        return ZERO
    return Div(num, den)


def power(base: SymExpr, n) -> SymExpr:
    n = as_fraction(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if n.denominator == 1:
            if not base.value and n < 0:
                raise DomainError("zero to a negative power")
            return Const(base.value ** int(n))
    if isinstance(base, Pow):
        return power(base.base, base.exponent * n) if n.denominator == 1 and base.exponent.denominator == 1 else Pow(base, n)
    return Pow(base, n)


def exp(e) -> SymExpr:
    e = lift(e)
    if isinstance(e, Const) and not e.value:
        return ONE
    return Exp(e)


def log(e) -> SymExpr:
    e = lift(e)
    if isinstance(e, Const) and e.value == 1:
        return ZERO
    return Log(e)


def ei(e) -> SymExpr:
    return Ei(lift(e))


# ------------------------------------------------------------ calculus

@lru_cache(maxsize=None)
def _free(e: SymExpr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, (Const, EulerGamma)):
        return frozenset()
    return frozenset().union(*(_free(c) for c in _children(e)))


def _children(e: SymExpr) -> tuple:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (Exp, Log, Ei)):
        return (e.arg,)
    return ()


@lru_cache(maxsize=None)
def _diff(e: SymExpr, x: str) -> SymExpr:
    if x not in _free(e):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*(_diff(a, x) for a in e.args))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            da = _diff(a, x)
            if da != ZERO:
                terms.append(mul(*e.args[:i], da, *e.args[i + 1:]))
        return add(*terms)
    if isinstance(e, Div):
        # (n/d)' = n'/d - n d'/d^2
        dn = _diff(e.num, x)
        dd = _diff(e.den, x)
        first = div(dn, e.den) if dn != ZERO else ZERO
        if dd == ZERO:
            return first
        return add(first, neg(div(mul(e.num, dd), power(e.den, 2))))
    if isinstance(e, Pow):
        return mul(Const(e.exponent), power(e.base, e.exponent - 1), _diff(e.base, x))
    if isinstance(e, Exp):
        return mul(e, _diff(e.arg, x))
    if isinstance(e, Log):
        return div(_diff(e.arg, x), e.arg)
    if isinstance(e, Ei):
        return mul(div(exp(e.arg), e.arg), _diff(e.arg, x))
    raise TypeError(f"cannot differentiate {type(e).__name__}")


def differentiate_expr(e: SymExpr, x: str, order: int = 1) -> SymExpr:
    for _ in range(order):
        e = _diff(e, x)
    return e


def substitute_expr(e: SymExpr, bindings: Mapping[str, SymExpr]) -> SymExpr:
    memo: dict = {}

    def walk(n: SymExpr) -> SymExpr:
        if n in memo:
            return memo[n]
        if not (_free(n) & bindings.keys()):
            out = n
        elif isinstance(n, Var):
            out = bindings[n.name]
        elif isinstance(n, Add):
            out = add(*map(walk, n.args))
        elif isinstance(n, Mul):
            out = mul(*map(walk, n.args))
        elif isinstance(n, Div):
            out = div(walk(n.num), walk(n.den))
        elif isinstance(n, Pow):
            out = power(walk(n.base), n.exponent)
        elif isinstance(n, Exp):
            out = exp(walk(n.arg))
        elif isinstance(n, Log):
            out = log(walk(n.arg))
        elif isinstance(n, Ei):
            out = ei(walk(n.arg))
        else:
            raise TypeError(type(n).__name__)
        memo[n] = out
        return out

    return walk(e)


# ------------------------------------------------------------ evaluation

class _Inexact(Exception):
    pass


def _eval(e: SymExpr, point, exact: bool, memo: dict):
    if e in memo:
        return memo[e]
    if isinstance(e, Const):
        out = e.value if exact else mpmath.mpf(e.value.numerator) / e.value.denominator
    elif isinstance(e, Var):
        if e.name not in point:
            raise UsageError(f"unbound variable {e.name!r}")
        out = point[e.name]
    elif isinstance(e, EulerGamma):
        if exact:
            raise _Inexact
        out = +mpmath.euler
    elif isinstance(e, Add):
        out = sum((_eval(a, point, exact, memo) for a in e.args[1:]), _eval(e.args[0], point, exact, memo))
    elif isinstance(e, Mul):
        out = _eval(e.args[0], point, exact, memo)
        for a in e.args[1:]:
            out = out * _eval(a, point, exact, memo)
    elif isinstance(e, Div):
        d = _eval(e.den, point, exact, memo)
        if not d:
            raise DomainError(f"division by zero in {e}")
        out = _eval(e.num, point, exact, memo) / d
    elif isinstance(e, Pow):
        b = _eval(e.base, point, exact, memo)
        if e.exponent.denominator == 1:
            if not b and e.exponent < 0:
                raise DomainError(f"zero to a negative power in {e}")
            out = b ** int(e.exponent)
        else:
            if exact:
                raise _Inexact
            if b < 0:
                raise DomainError(f"fractional power of a negative value in {e}")
            out = mpmath.power(b, mpmath.mpf(e.exponent.numerator) / e.exponent.denominator)
    elif isinstance(e, Exp):
        a = _eval(e.arg, point, exact, memo)
        if exact:
            if a:
                raise _Inexact
            out = Fraction(1)
        else:
            out = mpmath.exp(a)
    elif isinstance(e, Log):
        a = _eval(e.arg, point, exact, memo)
        if a <= 0:
            raise DomainError(f"log of nonpositive value in {e}")
        if exact:
            if a != 1:
                raise _Inexact
            out = Fraction(0)
        else:
            out = mpmath.log(a)
    elif isinstance(e, Ei):
        a = _eval(e.arg, point, exact, memo)
        if not a:
            raise DomainError("Ei is singular at 0")
        if exact:
            raise _Inexact
        out = mpmath.ei(a)
    else:
        raise TypeError(type(e).__name__)
    memo[e] = out
    return out


def evaluate_exact(e: SymExpr, point: Mapping[str, object]) -> Fraction | None:
    """Exact rational value, or ``None`` when a transcendental value appears."""
    pt = {k: as_fraction(v) for k, v in point.items()}
    try:
        return _eval(e, pt, True, {})
    except _Inexact:
        return None


def evaluate_expr(e: SymExpr, point: Mapping[str, object], precision_bits: int = DEFAULT_PRECISION_BITS):
    with mpmath.workprec(precision_bits):
        pt = {}
        for k, v in point.items():
            pt[k] = v if isinstance(v, mpmath.mpf) else to_bigfloat(v, precision_bits)
        return +_eval(e, pt, False, {})


# ------------------------------------------------------------ Taylor expansion

def taylor_derivatives(e: SymExpr, x: str, center, degree: int, precision_bits: int = DEFAULT_PRECISION_BITS,
                       point: Mapping[str, object] | None = None) -> list:
    """Values f^(k)(center)/k! for k = 0..degree; Fractions when exact, else mpf."""
    if degree < 0:
        raise UsageError("degree must be nonnegative")
    center = as_fraction(center)
    pt = dict(point or {})
    pt[x] = center
    out = []
    d = e
    for k in range(degree + 1):
        val = evaluate_exact(d, pt)
        if val is None:
            with mpmath.workprec(precision_bits):
                val = evaluate_expr(d, pt, precision_bits) / math.factorial(k)
        else:
            val = val / math.factorial(k)
        out.append(val)
        d = _diff(d, x)
    return out


def shift_to_powers(coeffs: list, center) -> list:
    """Turn sum c_k (x - center)^k into coefficients of x^j."""
    center = as_fraction(center)
    n = len(coeffs)
    exact = all(isinstance(c, Fraction) for c in coeffs)
    out = [Fraction(0)] * n
    for k, ck in enumerate(coeffs):
        for j in range(k + 1):
            w = math.comb(k, j) * (-center) ** (k - j)
            out[j] = out[j] + (ck * w if exact or isinstance(ck, Fraction) else ck * mpmath.mpf(w.numerator) / w.denominator)
    return out


def taylor_power_coefficients(e: SymExpr, x: str, center, degree: int,
                              precision_bits: int = DEFAULT_PRECISION_BITS) -> list:
    """Coefficients of x^0..x^degree of the degree-``degree`` Taylor polynomial about ``center``."""
    with mpmath.workprec(precision_bits):
        return shift_to_powers(taylor_derivatives(e, x, center, degree, precision_bits), center)


def taylor_polynomial(e: SymExpr, x: str, center, degree: int, grid=None,
                      precision_bits: int = DEFAULT_PRECISION_BITS, var_table: VarTable | None = None,
                      mode: str = "nearest") -> Polynomial:
    """Taylor polynomial of ``e`` in ``x`` expanded in powers of ``x``.

    With ``grid=None`` every coefficient must be exactly rational (otherwise
    :class:`DomainError`); with a grid, floating coefficients are snapped onto it.
    """
    other = _free(e) - {x}
    if other:
        raise UsageError(f"expression has free variables {sorted(other)} besides {x!r}")
    vt = var_table or VarTable((x,))
    i = vt.index(x)
    coeffs = taylor_power_coefficients(e, x, center, degree, precision_bits)
    terms = {}
    for j, c in enumerate(coeffs):
        if grid is None:
            if not isinstance(c, Fraction):
                raise DomainError("coefficient is not exactly rational; pass a grid")
        else:
            c = rationalize(c, grid, mode)
        m = [0] * len(vt)
        m[i] = j
        terms[tuple(m)] = c
    return Polynomial(vt, terms)


def taylor_multivariate(e: SymExpr, centers: Mapping[str, object], degree: int, grid=None,
                        precision_bits: int = DEFAULT_PRECISION_BITS, var_table: VarTable | None = None,
                        mode: str = "nearest") -> Polynomial:
    """Iterated univariate expansion: each variable in turn to ``degree``.

    The result is the tensor-product Taylor polynomial (degree ``degree`` in
    each variable separately), expanded in powers of the variables.
    """
    names = list(centers)
    other = _free(e) - set(names)
    if other:
        raise UsageError(f"expression has free variables {sorted(other)} without centers")
    vt = var_table or VarTable(names)
    cs = {n: as_fraction(c) for n, c in centers.items()}

    # derivative tensor: coefficient of prod (x_i - c_i)^{k_i}
    def expand(expr: SymExpr, idx: int, prefix: tuple, acc: dict):
        if idx == len(names):
            val = evaluate_exact(expr, cs)
            if val is None:
                val = evaluate_expr(expr, cs, precision_bits)
            acc[prefix] = val
            return
        d = expr
        for k in range(degree + 1):
            expand(mul(Const(Fraction(1, math.factorial(k))), d), idx + 1, prefix + (k,), acc)
            d = _diff(d, names[idx])

    acc: dict = {}
    with mpmath.workprec(precision_bits):
        expand(e, 0, (), acc)
        powers: dict = {}
        for ks, c in acc.items():
            # expand prod (x_i - c_i)^{k_i}
            partial = {(): c}
            for n, k in zip(names, ks):
                nxt = {}
                for js, val in partial.items():
                    for j in range(k + 1):
                        w = math.comb(k, j) * (-cs[n]) ** (k - j)
                        term = val * w if isinstance(val, Fraction) else val * mpmath.mpf(w.numerator) / w.denominator
                        key = js + (j,)
                        nxt[key] = nxt.get(key, 0) + term
                partial = nxt
            for js, val in partial.items():
                powers[js] = powers.get(js, 0) + val
    terms = {}
    for js, c in powers.items():
        if grid is None:
            if not isinstance(c, (Fraction, int)):
                raise DomainError("coefficient is not exactly rational; pass a grid")
            c = as_fraction(c)
        else:
            c = rationalize(c, grid, mode)
        m = [0] * len(vt)
        for n, j in zip(names, js):
            m[vt.index(n)] = j
        terms[tuple(m)] = c
    return Polynomial(vt, terms)
