"""Minimal-basis H2 with 1s Slater orbitals as exact polynomial systems.

Atoms A and B sit a distance ``r`` apart, each carrying one normalized 1s
orbital with unit exponent.  Every molecular integral is a closed-form
:class:`SymExpr` in ``r``; an energy functional is first assembled with
these analytic coefficients, then each combined coefficient is Taylor
expanded about ``center`` and snapped onto ``grid``.

UHF variables: spin-up orbital ``a*A + b*B`` with multiplier ``ev``,
spin-down orbital ``c*A + d*B`` with multiplier ``ew``.  After the
symmetric/antisymmetric change of variables ``a = t + s``, ``b = t - s``,
``c = u + v``, ``d = u - v`` the functional lives over ``s,t,u,v,ev,ew,r``.

RHF inverse problem variables: occupied orbital ``s*(A + B)`` with
eigenvalue ``eocc`` and unoccupied orbital ``t*(A - B)`` with eigenvalue
``eunocc``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath

from . import symexpr as sx
from .groebner import PolySystem
from .numkernel import DEFAULT_GRID, DEFAULT_PRECISION_BITS, DomainError, as_fraction, rationalize
from .polyring import MonomialOrder, Polynomial, UsageError, VarTable, differentiate, evaluate, substitute
from .symexpr import SymExpr

UHF_RAW_VARS = ("a", "b", "c", "d", "ev", "ew", "r")
UHF_VARS = ("s", "t", "u", "v", "ev", "ew", "r")
RHF_OPT_VARS = ("t", "ev", "r")
RHF_INV_VARS = ("s", "t", "eocc", "eunocc", "r")

ROLES = {
    "a": "lcao", "b": "lcao", "c": "lcao", "d": "lcao",
    "s": "lcao", "t": "lcao", "u": "lcao", "v": "lcao",
    "ev": "multiplier", "ew": "multiplier", "eocc": "multiplier", "eunocc": "multiplier",
    "r": "geometry",
}


class UnsupportedError(ValueError):
    """Requested model feature lies outside the 1s, unit-exponent H2 model."""


@dataclass(frozen=True)
class HF2Config:
    method: str = "UHF"
    center: Fraction = Fraction(7, 5)
    taylor_degree: int = 4
    grid: Fraction = DEFAULT_GRID
    precision_bits: int = DEFAULT_PRECISION_BITS
    rounding: str = "truncate"
    exponent: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "center", as_fraction(self.center))
        object.__setattr__(self, "grid", as_fraction(self.grid))
        object.__setattr__(self, "exponent", as_fraction(self.exponent))
        if self.method not in ("UHF", "RHF"):
            raise UsageError(f"method must be UHF or RHF, got {self.method!r}")
        if self.center <= 0:
            raise DomainError("expansion center must be positive")
        if self.taylor_degree < 1:
            raise UsageError("taylor_degree must be at least 1")
        if self.exponent != 1:
            raise UnsupportedError("only unit orbital exponents are supported")

    def to_dict(self) -> dict:
        from .numkernel import format_rational

        return {
            "method": self.method,
            "center": format_rational(self.center),
            "taylor_degree": self.taylor_degree,
            "grid": format_rational(self.grid),
            "precision_bits": self.precision_bits,
            "rounding": self.rounding,
        }


# ---------------------------------------------------------------- integrals

R = sx.var("r")


def coulomb_expr(za, zb, zc, zd, dist: SymExpr = R) -> SymExpr:
    """[1s_za(A) 1s_zb(A) | 1s_zc(B) 1s_zd(B)] for normalized 1s orbitals.

    Each one-center product is a scaled 1s density with exponent
    (z1 + z2) / 2; the two densities then interact through the closed-form
    two-center Coulomb integral.
    """
    za, zb, zc, zd = (sx.lift(z) for z in (za, zb, zc, zd))
    alpha = (za + zb) / 2
    beta = (zc + zd) / 2
    # normalization of the product relative to a unit-charge density
    charge_a = (za * zb) ** Fraction(3, 2) / alpha ** 3
    charge_b = (zc * zd) ** Fraction(3, 2) / beta ** 3
    return charge_a * charge_b * _density_coulomb(alpha, beta, dist)


def _density_coulomb(a: SymExpr, b: SymExpr, R_: SymExpr) -> SymExpr:
    """Interaction of unit 1s densities with exponents 2a and 2b at distance R."""
    if isinstance(a, sx.Const) and isinstance(b, sx.Const) and a.value == b.value:
        x = a
        return 1 / R_ - sx.exp(-2 * x * R_) * (1 / R_ + Fraction(11, 8) * x + Fraction(3, 4) * x ** 2 * R_
                                               + x ** 3 * R_ ** 2 / 6)
    d = a ** 2 - b ** 2
    num = (a ** 4 * sx.exp(-2 * b * R_) * ((a ** 2 - 3 * b ** 2) + b * R_ * d)
           + b ** 4 * sx.exp(-2 * a * R_) * ((3 * a ** 2 - b ** 2) + a * R_ * d))
    return 1 / R_ - num / (R_ * d ** 3)


def _overlap(R_):
    return sx.exp(-R_) * (1 + R_ + R_ ** 2 / 3)


def _overlap_reflected(R_):
    return sx.exp(R_) * (1 - R_ + R_ ** 2 / 3)


def _exchange(R_):
    S = _overlap(R_)
    Sp = _overlap_reflected(R_)
    tail = S * S * (sx.GAMMA + sx.log(R_)) - 2 * S * Sp * sx.ei(-2 * R_) + Sp * Sp * sx.ei(-4 * R_)
    return (-sx.exp(-2 * R_) * (Fraction(-25, 8) + Fraction(23, 4) * R_ + 3 * R_ ** 2 + R_ ** 3 / 3)
            + 6 / R_ * tail) / 5


def _hybrid(R_):
    return (sx.exp(-R_) * (R_ + Fraction(1, 8) + Fraction(5, 16) / R_)
            - sx.exp(-3 * R_) * (Fraction(1, 8) + Fraction(5, 16) / R_))


@dataclass
class IntegralTable:
    entries: dict[str, SymExpr]

    def __getitem__(self, key: str) -> SymExpr:
        return self.entries[key]

    def values_at(self, r, precision_bits: int = DEFAULT_PRECISION_BITS) -> dict[str, mpmath.mpf]:
        return {k: sx.evaluate_expr(e, {"r": r}, precision_bits) for k, e in self.entries.items()}

    def eri(self, i: int, j: int, k: int, l: int) -> SymExpr:
        """(ij|kl) over the atom labels 0 (A) and 1 (B)."""
        if i == j and k == l:
            return self.entries["coulomb_aaaa"] if i == k else self.entries["coulomb_aabb"]
        if i != j and k != l:
            return self.entries["exchange_abab"]
        return self.entries["hybrid_aaab"]

    def core(self, i: int, j: int) -> SymExpr:
        return self.entries["core_aa"] if i == j else self.entries["core_ab"]

    def overlap(self, i: int, j: int) -> SymExpr:
        return sx.ONE if i == j else self.entries["overlap"]


def build_integral_table(config: HF2Config | None = None) -> IntegralTable:
    config = config or HF2Config()
    S = _overlap(R)
    e = {
        "overlap": S,
        "kinetic_aa": sx.const(Fraction(1, 2)),
        "kinetic_ab": sx.exp(-R) * (1 + R - R ** 2 / 3) / 2,
        "attraction_aa_a": sx.const(-1),
        "attraction_aa_b": -(1 / R - sx.exp(-2 * R) * (1 + 1 / R)),
        "attraction_ab_a": -sx.exp(-R) * (1 + R),
        "coulomb_aaaa": sx.const(Fraction(5, 8)),
        "coulomb_aabb": coulomb_expr(1, 1, 1, 1),
        "exchange_abab": _exchange(R),
        "hybrid_aaab": _hybrid(R),
        "nuclear": 1 / R,
    }
    e["core_aa"] = e["kinetic_aa"] + e["attraction_aa_a"] + e["attraction_aa_b"]
    e["core_ab"] = e["kinetic_ab"] + 2 * e["attraction_ab_a"]
    return IntegralTable(e)


# ---------------------------------------------------------------- functionals

@dataclass
class EnergyFunctional:
    """Polynomial Lagrangian plus the analytic form it was expanded from."""

    omega: Polynomial
    roles: dict[str, str]
    config: HF2Config
    exact: dict[tuple, SymExpr] = field(default_factory=dict)  # monomial without r -> coefficient in r
    stage: str = "raw"  # raw | symmetric | rhf-opt | rhf-occupied | rhf-virtual
    parts: dict[str, "EnergyFunctional"] = field(default_factory=dict)

    @property
    def vars(self) -> VarTable:
        return self.omega.vars

    def exact_value(self, point: Mapping[str, object], precision_bits: int | None = None) -> mpmath.mpf:
        bits = precision_bits or self.config.precision_bits
        names = [n for n in self.vars.names if n != "r"]
        with mpmath.workprec(bits):
            total = mpmath.mpf(0)
            for mono, expr in self.exact.items():
                w = mpmath.mpf(1)
                for n, k in zip(names, mono):
                    if k:
                        w *= _mp(point[n]) ** k
                total += w * sx.evaluate_expr(expr, {"r": point["r"]}, bits)
            return total

    def to_dict(self) -> dict:
        order = MonomialOrder("lex", self.vars)
        return {
            "stage": self.stage,
            "vars": list(self.vars.names),
            "roles": {n: self.roles[n] for n in self.vars.names},
            "omega": self.omega.to_str(order),
            "config": self.config.to_dict(),
        }


def _mp(x) -> mpmath.mpf:
    if isinstance(x, mpmath.mpf):
        return x
    q = as_fraction(x)
    return mpmath.mpf(q.numerator) / q.denominator


def _snap_rationalize(x, grid: Fraction, mode: str, precision_bits: int) -> Fraction:
    """Grid rounding that first snaps values lying within float noise of a grid point."""
    if isinstance(x, Fraction):
        y = x / grid
        if y.denominator == 1:
            return x
        return rationalize(x, grid, mode)
    with mpmath.workprec(precision_bits):
        y = x / (mpmath.mpf(grid.numerator) / grid.denominator)
        n = mpmath.nint(y)
        if abs(y - n) < mpmath.mpf(2) ** (-(precision_bits // 2)):
            return int(n) * grid
    return rationalize(x, grid, mode)


def polynomialize(exact: Mapping[tuple, SymExpr], names: Sequence[str], config: HF2Config) -> Polynomial:
    """Taylor-expand each analytic coefficient in r and snap the combined coefficients."""
    vt = VarTable(tuple(names) + ("r",))
    terms: dict[tuple, Fraction] = {}
    for mono, expr in exact.items():
        coeffs = sx.taylor_power_coefficients(expr, "r", config.center, config.taylor_degree, config.precision_bits)
        for j, c in enumerate(coeffs):
            q = _snap_rationalize(c, config.grid, config.rounding, config.precision_bits)
            if q:
                terms[tuple(mono) + (j,)] = q
    return Polynomial(vt, terms)


def _collect(acc: dict, mono: tuple, expr: SymExpr) -> None:
    acc.setdefault(mono, []).append(expr)


def _finish(acc: dict) -> dict[tuple, SymExpr]:
    out = {}
    for mono, exprs in sorted(acc.items()):
        e = sx.add(*exprs)
        if e != sx.ZERO:
            out[mono] = e
    return out


def uhf_exact_terms(table: IntegralTable) -> dict[tuple, SymExpr]:
    """Coefficient of each a,b,c,d,ev,ew monomial of the UHF Lagrangian, as a function of r."""
    acc: dict = {}
    up = ((0, "a"), (1, "b"))
    dn = ((0, "c"), (1, "d"))
    idx = {n: i for i, n in enumerate(UHF_RAW_VARS[:-1])}

    def mono(*names: str) -> tuple:
        e = [0] * 6
        for n in names:
            e[idx[n]] += 1
        return tuple(e)

    for orb in (up, dn):
        for (i, x), (j, y) in itertools.product(orb, repeat=2):
            _collect(acc, mono(x, y), table.core(i, j))
    for (i, x), (j, y), (k, z), (l, w) in itertools.product(up, up, dn, dn):
        _collect(acc, mono(x, y, z, w), table.eri(i, j, k, l))
    _collect(acc, mono(), table["nuclear"])
    for orb, lam in ((up, "ev"), (dn, "ew")):
        _collect(acc, mono(lam), sx.ONE)
        for (i, x), (j, y) in itertools.product(orb, repeat=2):
            _collect(acc, mono(lam, x, y), -table.overlap(i, j))
    return _finish(acc)


def build_energy_functional(config: HF2Config | None = None) -> EnergyFunctional:
    """UHF Lagrangian over a,b,c,d,ev,ew,r (for ``method="RHF"`` the occupied/virtual pair)."""
    config = config or HF2Config()
    if config.method == "RHF":
        return build_rhf_functional(config)
    table = build_integral_table(config)
    exact = uhf_exact_terms(table)
    omega = polynomialize(exact, UHF_RAW_VARS[:-1], config)
    return EnergyFunctional(omega, {n: ROLES[n] for n in UHF_RAW_VARS}, config, exact, "raw")


def transform_symmetric(F: EnergyFunctional, inverse: bool = False) -> EnergyFunctional:
    """a = t + s, b = t - s, c = u + v, d = u - v (or back with ``inverse``)."""
    src, dst = (UHF_VARS, UHF_RAW_VARS) if inverse else (UHF_RAW_VARS, UHF_VARS)
    if F.vars.names != src:
        raise UsageError(f"expected variables {src}, got {F.vars.names}")
    both = VarTable(("a", "b", "c", "d", "s", "t", "u", "v", "ev", "ew", "r"))
    P = {n: Polynomial.var(both, n) for n in both.names}
    if inverse:
        half = Fraction(1, 2)
        bind = {"t": (P["a"] + P["b"]) * half, "s": (P["a"] - P["b"]) * half,
                "u": (P["c"] + P["d"]) * half, "v": (P["c"] - P["d"]) * half}
    else:
        bind = {"a": P["t"] + P["s"], "b": P["t"] - P["s"], "c": P["u"] + P["v"], "d": P["u"] - P["v"]}
    omega = substitute(F.omega.change_vars(both), bind).change_vars(VarTable(dst))
    exact = _transform_exact(F.exact, src[:-1], dst[:-1], inverse)
    return replace(F, omega=omega, roles={n: ROLES[n] for n in dst}, exact=exact,
                   stage="raw" if inverse else "symmetric")


def _transform_exact(exact: Mapping[tuple, SymExpr], src: Sequence[str], dst: Sequence[str], inverse: bool):
    """Apply the same linear substitution to the analytic coefficient map."""
    vt = VarTable(tuple(src) + tuple(n for n in dst if n not in src))
    P = {n: Polynomial.var(vt, n) for n in vt.names}
    if inverse:
        half = Fraction(1, 2)
        bind = {"t": (P["a"] + P["b"]) * half, "s": (P["a"] - P["b"]) * half,
                "u": (P["c"] + P["d"]) * half, "v": (P["c"] - P["d"]) * half}
    else:
        bind = {"a": P["t"] + P["s"], "b": P["t"] - P["s"], "c": P["u"] + P["v"], "d": P["u"] - P["v"]}
    acc: dict = {}
    n_src = len(src)
    for mono, expr in exact.items():
        e = [0] * len(vt)
        e[:n_src] = mono
        image = substitute(Polynomial(vt, {tuple(e): 1}), bind)
        for m, c in image.terms.items():
            out = tuple(m[vt.index(n)] for n in dst)
            _collect(acc, out, sx.mul(sx.const(c), expr))
    return _finish(acc)


# ---------------------------------------------------------------- systems

@dataclass
class ModelSystem:
    """A polynomial system with a label per equation and its source functional."""

    system: PolySystem
    labels: list[str]
    functional: EnergyFunctional
    constraints: list[str] = field(default_factory=list)

    @property
    def polys(self) -> list[Polynomial]:
        return self.system.polys

    @property
    def vars(self) -> VarTable:
        return self.system.vars

    def nonzero(self) -> list[Polynomial]:
        return [p for p in self.system.polys if not p.is_zero()]

    def to_dict(self) -> dict:
        d = self.system.to_dict()
        d["labels"] = list(self.labels)
        d["constraints"] = list(self.constraints)
        d["roles"] = {n: ROLES.get(n, "target") for n in self.vars.names}
        return d


def clear_denominators(p: Polynomial) -> Polynomial:
    """Multiply by the positive lcm of the coefficient denominators."""
    from math import lcm

    den = 1
    for c in p.terms.values():
        den = lcm(den, c.denominator)
    return p.scale(den)


def stationarity_system(F: EnergyFunctional) -> ModelSystem:
    """Partial derivatives of the functional (denominators cleared), one per variable."""
    if F.stage == "symmetric":
        order_vars = ("t", "s", "u", "v", "ev", "ew", "r")
    elif F.stage == "rhf-opt":
        order_vars = RHF_OPT_VARS
    elif F.stage == "raw":
        order_vars = UHF_RAW_VARS
    else:
        raise UsageError(f"no stationarity system for stage {F.stage!r}")
    polys = [clear_denominators(differentiate(F.omega, x)) for x in order_vars]
    system = PolySystem(polys, MonomialOrder("lex", F.vars))
    return ModelSystem(system, [f"d/d{x}" for x in order_vars], F)


def uhf_stationarity(config: HF2Config | None = None) -> ModelSystem:
    return stationarity_system(transform_symmetric(build_energy_functional(config or HF2Config())))


def rhf_optimization_functional(config: HF2Config | None = None) -> EnergyFunctional:
    """Closed-shell restriction of the UHF functional: s = v = 0, u = t, ew = ev."""
    config = config or HF2Config()
    F = transform_symmetric(build_energy_functional(replace(config, method="UHF")))
    vt = VarTable(RHF_OPT_VARS)
    omega = F.omega.subs({"s": 0, "v": 0})
    both = F.vars
    omega = substitute(omega, {"u": Polynomial.var(both, "t"), "ew": Polynomial.var(both, "ev")})
    omega = omega.change_vars(vt)
    exact: dict = {}
    acc: dict = {}
    names = both.names[:-1]
    for mono, expr in F.exact.items():
        e = dict(zip(names, mono))
        if e["s"] or e["v"]:
            continue
        _collect(acc, (e["t"] + e["u"], e["ev"] + e["ew"]), expr)
    exact = _finish(acc)
    return EnergyFunctional(omega, {n: ROLES[n] for n in RHF_OPT_VARS}, config, exact, "rhf-opt")


def rhf_optimization_system(config: HF2Config | None = None) -> ModelSystem:
    ms = stationarity_system(rhf_optimization_functional(config))
    ms.system = ms.system.with_order("grevlex")
    return ms


def build_rhf_functional(config: HF2Config | None = None) -> EnergyFunctional:
    """Occupied and unoccupied closed-shell Lagrangians over s,t,eocc,eunocc,r.

    The occupied part is the UHF functional with both spins in s*(A+B).  The
    unoccupied part is the virtual orbital energy t*(A-B) in the field of the
    doubly occupied orbital, with its own normalization multiplier.
    """
    config = replace(config or HF2Config(), method="RHF")
    vt = VarTable(RHF_INV_VARS)
    raw = build_energy_functional(replace(config, method="UHF"))
    both = VarTable(UHF_RAW_VARS[:-1] + ("s", "t", "eocc", "eunocc", "r"))
    P = {n: Polynomial.var(both, n) for n in both.names}
    occ = substitute(raw.omega.change_vars(both),
                     {"a": P["s"], "b": P["s"], "c": P["s"], "d": P["s"], "ev": P["eocc"], "ew": P["eocc"]})
    occ = occ.change_vars(vt)
    occ_exact: dict = {}
    acc: dict = {}
    for mono, expr in raw.exact.items():
        a, b, c, d, ev, ew = mono
        _collect(acc, (a + b + c + d, 0, ev + ew, 0), expr)
    occ_exact = _finish(acc)

    table = build_integral_table(config)
    J, K, S = table["coulomb_aabb"], table["exchange_abab"], table["overlap"]
    same = table["coulomb_aaaa"]
    virt_exact = _finish({
        (0, 2, 0, 0): [2 * table["core_aa"] - 2 * table["core_ab"]],
        # 2 (oo|uu) - (ou|uo) for o = A + B, u = A - B
        (2, 2, 0, 0): [2 * (2 * same + 2 * J - 4 * K) - (2 * same - 2 * J)],
        (0, 0, 0, 1): [sx.ONE],
        (0, 2, 0, 1): [-(2 - 2 * S)],
    })
    virt = polynomialize(virt_exact, RHF_INV_VARS[:-1], config)
    roles = {n: ROLES[n] for n in RHF_INV_VARS}
    occ_f = EnergyFunctional(occ, roles, config, occ_exact, "rhf-occupied")
    virt_f = EnergyFunctional(virt, roles, config, virt_exact, "rhf-virtual")
    total_exact = dict(occ_exact)
    for k, v in virt_exact.items():
        total_exact[k] = sx.add(total_exact[k], v) if k in total_exact else v
    return EnergyFunctional(occ + virt, roles, config, total_exact, "rhf",
                            {"occupied": occ_f, "virtual": virt_f})


def orthogonality_polynomial(vt: VarTable, config: HF2Config) -> Polynomial:
    """<s(A+B) | t(A-B)> after Taylor truncation (vanishes identically by parity)."""
    S = build_integral_table(config)["overlap"]
    exact = _finish({(1, 1, 0, 0): [sx.ONE + S - S - sx.ONE]})
    if not exact:
        return Polynomial.zero(vt)
    return polynomialize(exact, RHF_INV_VARS[:-1], config)


def rhf_fixed_system(config: HF2Config | None = None) -> ModelSystem:
    """Closed-shell orbital equations with r free: occupied/unoccupied stationarity,
    both normalizations, and occupied-unoccupied orthogonality."""
    F = build_rhf_functional(config)
    occ, virt = F.parts["occupied"].omega, F.parts["virtual"].omega
    polys = [
        clear_denominators(differentiate(occ, "s")),
        clear_denominators(differentiate(virt, "t")),
        clear_denominators(differentiate(occ, "eocc")),
        clear_denominators(differentiate(virt, "eunocc")),
        orthogonality_polynomial(F.vars, F.config),
    ]
    labels = ["d/ds occupied", "d/dt unoccupied", "occupied norm", "unoccupied norm", "orthogonality"]
    return ModelSystem(PolySystem(polys, MonomialOrder("lex", F.vars)), labels, F)


# ---------------------------------------------------------------- constraints

@dataclass(frozen=True)
class FixedDistance:
    r0: Fraction = Fraction(7, 5)


@dataclass(frozen=True)
class GroundState:
    pass


@dataclass(frozen=True)
class GapTarget:
    e_gap: Fraction = Fraction(9, 10)


@dataclass(frozen=True)
class Stability:
    pass


def _describe(c) -> str:
    from .numkernel import format_rational

    if isinstance(c, FixedDistance):
        return f"fixed-distance r={format_rational(as_fraction(c.r0))}"
    if isinstance(c, GroundState):
        return "ground-state s=v=0"
    if isinstance(c, GapTarget):
        return f"gap eunocc-eocc={format_rational(as_fraction(c.e_gap))}"
    return "stability d/dr=0"


def apply_constraint(S: ModelSystem, c) -> ModelSystem:
    labels = list(S.labels)
    polys = list(S.polys)
    vt = S.vars
    order_kind = S.system.order.kind
    F = S.functional
    if isinstance(c, FixedDistance):
        r0 = as_fraction(c.r0)
        line = clear_denominators(Polynomial.var(vt, "r") * r0.denominator - r0.numerator)
        if "d/dr" in labels:
            i = labels.index("d/dr")
            polys[i] = line
            labels[i] = "fixed r"
        else:
            polys.append(line)
            labels.append("fixed r")
    elif isinstance(c, GroundState):
        if F.stage != "symmetric":
            raise UsageError("the ground-state restriction applies to the transformed UHF system")
        keep = tuple(n for n in vt.names if n not in ("s", "v"))
        new_vt = VarTable(keep)
        new_p, new_l = [], []
        for p, lab in zip(polys, labels):
            q = p.subs({"s": 0, "v": 0})
            if q.is_zero():
                continue
            new_p.append(q.change_vars(new_vt))
            new_l.append(lab)
        return ModelSystem(PolySystem(new_p, MonomialOrder(order_kind, new_vt)), new_l, F,
                           S.constraints + [_describe(c)])
    elif isinstance(c, GapTarget):
        if F.stage != "rhf":
            raise UsageError("a gap target needs the RHF occupied/unoccupied system")
        gap = as_fraction(c.e_gap)
        polys.append(clear_denominators(Polynomial.var(vt, "eunocc") - Polynomial.var(vt, "eocc") - gap))
        labels.append("gap")
    elif isinstance(c, Stability):
        if "d/dr" in labels:
            raise UsageError("system already contains the geometry condition")
        source = F.parts["occupied"].omega if F.stage == "rhf" else F.omega
        polys.append(clear_denominators(differentiate(source, "r")))
        labels.append("d/dr")
    else:
        raise UsageError(f"unknown constraint {c!r}")
    return ModelSystem(PolySystem(polys, MonomialOrder(order_kind, vt)), labels, F,
                       S.constraints + [_describe(c)])


def build_rhf_inverse_system(config: HF2Config | None = None, e_gap=Fraction(9, 10)) -> ModelSystem:
    return apply_constraint(rhf_fixed_system(config), GapTarget(as_fraction(e_gap)))


# ---------------------------------------------------------------- observables

def total_energy(sol, F: EnergyFunctional, tol=Fraction(1, 10 ** 6)) -> mpmath.mpf:
    """Omega at a solution; the multiplier terms vanish once the normalizations hold."""
    values = dict(sol) if isinstance(sol, Mapping) else sol.values
    bits = getattr(sol, "precision_bits", F.config.precision_bits)
    tol = as_fraction(tol)
    with mpmath.workprec(bits):
        pt = {k: values[k] for k in F.vars.names}
        for n in F.vars.names:
            if F.roles.get(n) == "multiplier":
                g = differentiate(F.omega, n)
                val = abs(_mp(evaluate(g, pt)))
                if val > mpmath.mpf(tol.numerator) / tol.denominator:
                    raise DomainError(f"normalization for {n} violated by {mpmath.nstr(val, 3)}")
        return _mp(evaluate(F.omega, pt))


def deviation_curve(config: HF2Config | None, r_grid: Sequence) -> list[tuple[Fraction, mpmath.mpf]]:
    """Relative deviation of the polynomial functional from the analytic one at
    a = b = c = d = 1, ev = ew = 0."""
    config = config or HF2Config()
    F = build_energy_functional(replace(config, method="UHF"))
    out = []
    for r in r_grid:
        r = as_fraction(r)
        if r <= 0:
            raise DomainError("r must be positive")
        pt = {"a": 1, "b": 1, "c": 1, "d": 1, "ev": 0, "ew": 0, "r": r}
        with mpmath.workprec(config.precision_bits):
            exact = F.exact_value(pt)
            approx = _mp(evaluate(F.omega, pt))
            out.append((r, abs(approx - exact) / abs(exact)))
    return out


def eigen_curve(config: HF2Config | None, r_grid: Sequence, tol=Fraction(1, 10 ** 8)) -> list[dict]:
    """Occupied and unoccupied eigenvalues along r for the branch connected to
    the ground state at the expansion center."""
    from .groebner import lex_basis
    from .rootsolve import solve_triangular_system
    from .triangular import decompose_triangular

    config = config or HF2Config()
    base = rhf_fixed_system(config)
    rows = []
    grid = sorted({as_fraction(r) for r in r_grid}, key=lambda r: abs(r - config.center))
    found = {}
    for r in grid:
        system = apply_constraint(base, FixedDistance(r))
        gens = system.nonzero()
        sols = solve_triangular_system(decompose_triangular(lex_basis(gens)), gens, tol, config.precision_bits)
        if not sols:
            found[r] = None
            continue
        anchor = found.get(_nearest_done(found, r))
        if anchor is None:
            best = min(sols, key=lambda s: (s.values["eocc"], s.values["s"] < 0, s.values["t"] < 0))
        else:
            best = min(sols, key=lambda s: (abs(s.values["eocc"] - anchor["eocc"])
                                            + abs(s.values["eunocc"] - anchor["eunocc"])))
        found[r] = {"eocc": best.values["eocc"], "eunocc": best.values["eunocc"]}
    for r in sorted(found):
        v = found[r]
        if v is None:
            rows.append({"r": r, "eocc": None, "eunocc": None, "gap": None, "flag": "no real solution"})
        else:
            rows.append({"r": r, "eocc": v["eocc"], "eunocc": v["eunocc"], "gap": v["eunocc"] - v["eocc"], "flag": ""})
    return rows


def _nearest_done(found: dict, r: Fraction):
    done = [x for x, v in found.items() if v is not None]
    if not done:
        return None
    return min(done, key=lambda x: abs(x - r))
