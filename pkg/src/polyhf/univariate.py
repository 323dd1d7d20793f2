"""Dense univariate polynomials over Q, Sturm sequences and real-root isolation.

A polynomial is a list of Fractions, constant term first, with no trailing
zeros (the zero polynomial is ``[]``).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


from .numkernel import DEFAULT_PRECISION_BITS, as_fraction, to_bigfloat
from .polyring import Polynomial, UsageError

UPoly = list


def trim(p: Sequence) -> UPoly:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def degree(p: UPoly) -> int:
    return len(p) - 1


def from_polynomial(p: Polynomial, name: str | None = None) -> UPoly:
    used = p.variables()
    if name is None:
        if len(used) > 1:
            raise UsageError(f"polynomial is not univariate: uses {used}")
        name = used[0] if used else p.vars.names[0]
    elif set(used) - {name}:
        raise UsageError(f"polynomial uses {used}, expected only {name!r}")
    i = p.vars.index(name)
    out = [Fraction(0)] * (p.degree(name) + 1 if p.terms else 0)
    for m, c in p.terms.items():
        out[m[i]] = c
    return trim(out)


def to_polynomial(p: UPoly, var_table, name: str) -> Polynomial:
    vt = var_table
    i = vt.index(name)
    terms = {}
    for k, c in enumerate(p):
        m = [0] * len(vt)
        m[i] = k
        terms[tuple(m)] = c
    return Polynomial(vt, terms)


def sub(p: UPoly, q: UPoly) -> UPoly:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) - (q[i] if i < len(q) else 0) for i in range(n)])


def mul(p: UPoly, q: UPoly) -> UPoly:
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return trim(out)


def derivative(p: UPoly) -> UPoly:
    return trim([k * c for k, c in enumerate(p)][1:])


def divmod_poly(p: UPoly, q: UPoly) -> tuple[UPoly, UPoly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = len(q) - 1
    lead = q[-1]
    quo = [Fraction(0)] * max(len(p) - dq, 0)
    while len(r) - 1 >= dq and r:
        k = len(r) - 1 - dq
        c = r[-1] / lead
        quo[k] = c
        for j, b in enumerate(q):
            r[k + j] -= c * b
        r = trim(r)
    return trim(quo), r


def monic(p: UPoly) -> UPoly:
    if not p:
        return p
    lead = p[-1]
    return [c / lead for c in p]


def primitive(p: UPoly) -> UPoly:
    """Integer coefficients with gcd 1 and positive leading coefficient."""
    if not p:
        return p
    den = 1
    for c in p:
        den = math.lcm(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    if ints[-1] < 0:
        g = -g
    return [Fraction(c // g) for c in ints]


def gcd(p: UPoly, q: UPoly) -> UPoly:
    a, b = trim(p), trim(q)
    while b:
        _, r = divmod_poly(a, b)
        a, b = b, primitive(r)
    return monic(a)


def squarefree_part(p: UPoly) -> UPoly:
    p = trim(p)
    if len(p) <= 2:
        return monic(p)
    g = gcd(p, derivative(p))
    q, _ = divmod_poly(p, g)
    return monic(q)


def squarefree_decomposition(p: UPoly) -> list[tuple[UPoly, int]]:
    """Yun's algorithm: p = lc * prod f_i^i with f_i squarefree and pairwise coprime."""
    p = monic(trim(p))
    if len(p) <= 1:
        return []
    out = []
    dp = derivative(p)
    a = gcd(p, dp)
    b, _ = divmod_poly(p, a)
    c, _ = divmod_poly(dp, a)
    d = sub(c, derivative(b))
    i = 1
    while len(b) > 1:
        f = gcd(b, d)
        if len(f) > 1:
            out.append((monic(f), i))
        b, _ = divmod_poly(b, f)
        c, _ = divmod_poly(d, f)
        d = sub(c, derivative(b))
        i += 1
    return out


def eval_exact(p: UPoly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def eval_float(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------- Sturm

def sturm_sequence(p: UPoly) -> list[UPoly]:
    p = primitive(trim(p))
    if not p:
        raise UsageError("Sturm sequence of the zero polynomial")
    seq = [p, primitive(derivative(p))]
    while seq[-1]:
        _, r = divmod_poly(seq[-2], seq[-1])
        if not r:
            break
        # keep the sign: -rem, scaled by a positive content only
        r = [-c for c in r]
        prim = primitive(r)
        if (prim[-1] > 0) != (r[-1] > 0):
            prim = [-c for c in prim]
        seq.append(prim)
    seq = [s for s in seq if s]
    g = seq[-1]
    if len(g) > 1:
        # divide out gcd(p, p') so the count stays defined at repeated roots
        seq = [divmod_poly(s, g)[0] for s in seq]
    return seq


def _sign_changes(values: Sequence) -> int:
    count = 0
    last = 0
    for v in values:
        if v:
            s = 1 if v > 0 else -1
            if last and s != last:
                count += 1
            last = s
    return count


def sturm_variations(seq: list[UPoly], x) -> int:
    if x == math.inf or x == -math.inf:
        vals = []
        for s in seq:
            lead = s[-1]
            if x == -math.inf and (len(s) - 1) % 2:
                lead = -lead
            vals.append(lead)
        return _sign_changes(vals)
    x = as_fraction(x)
    return _sign_changes([eval_exact(s, x) for s in seq])


def count_roots(p: UPoly, lo, hi, seq: list[UPoly] | None = None) -> int:
    """Distinct real roots in (lo, hi]."""
    seq = seq or sturm_sequence(p)
    return sturm_variations(seq, lo) - sturm_variations(seq, hi)


def cauchy_bound(p: UPoly) -> Fraction:
    lead = abs(p[-1])
    m = max((abs(c) for c in p[:-1]), default=Fraction(0))
    b = 1 + m / lead
    # round up to a power of two for tidy bisection endpoints
    k = max(0, b.numerator.bit_length() - b.denominator.bit_length() + 1)
    return Fraction(2) ** k


def isolate(p: UPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint (lo, hi] intervals each holding exactly one distinct real root."""
    p = trim(p)
    if not p:
        raise UsageError("cannot isolate roots of the zero polynomial")
    if len(p) == 1:
        return []
    seq = sturm_sequence(p)
    bound = cauchy_bound(p)
    out = []

    def rec(lo: Fraction, hi: Fraction, vlo: int, vhi: int):
        n = vlo - vhi
        if n == 0:
            return
        if n == 1:
            out.append((lo, hi))
            return
        mid = (lo + hi) / 2
        vmid = sturm_variations(seq, mid)
        rec(lo, mid, vlo, vmid)
        rec(mid, hi, vmid, vhi)

    lo, hi = -bound, bound
    rec(lo, hi, sturm_variations(seq, lo), sturm_variations(seq, hi))
    return out


def refine(p: UPoly, lo: Fraction, hi: Fraction, tol, precision_bits: int = DEFAULT_PRECISION_BITS):
    """Root in (lo, hi] to width < tol: exact bisection with Newton acceleration.

    Returns the bracket midpoint as an ``mpf`` together with the final exact bracket.
    """
    p = squarefree_part(p)
    dp = derivative(p)
    tol = as_fraction(tol)
    if eval_exact(p, hi) == 0:
        return to_bigfloat(hi, precision_bits), (hi, hi)
    flo = eval_exact(p, lo)
    slo = (flo > 0) - (flo < 0)
    if slo == 0:
        # lo itself is a root of p but (lo, hi] excludes it; nudge inside
        lo = lo + (hi - lo) / 2 ** 20
        flo = eval_exact(p, lo)
        slo = (flo > 0) - (flo < 0)
    while hi - lo >= tol:
        # Newton step from the midpoint, accepted only if it shrinks the bracket
        mid = (lo + hi) / 2
        fm = eval_exact(p, mid)
        if fm == 0:
            return to_bigfloat(mid, precision_bits), (mid, mid)
        dm = eval_exact(dp, mid)
        if dm:
            x = mid - fm / dm
            width = (hi - lo) / 64
            if lo < x < hi and eval_exact(p, x) == 0:
                return to_bigfloat(x, precision_bits), (x, x)
            if lo < x < hi:
                # limit denominator growth: snap to a dyadic grid finer than the bracket
                bits = width.denominator.bit_length() - width.numerator.bit_length() + 8
                step = Fraction(1, 2 ** max(8, bits))
                x = Fraction(math.floor(x / step)) * step
                a, b = x - width, x + width
                if lo < a and b < hi:
                    fa, fb = eval_exact(p, a), eval_exact(p, b)
                    sa = (fa > 0) - (fa < 0)
                    sb = (fb > 0) - (fb < 0)
                    if sa == 0:
                        return to_bigfloat(a, precision_bits), (a, a)
                    if sb == 0:
                        return to_bigfloat(b, precision_bits), (b, b)
                    if sa != sb:
                        lo, hi, slo = a, b, sa
                        continue
        sm = (fm > 0) - (fm < 0)
        if sm == slo:
            lo = mid
        else:
            hi = mid
    mid = (lo + hi) / 2
    return to_bigfloat(mid, precision_bits), (lo, hi)


def real_roots(p: UPoly, tol=Fraction(1, 10 ** 30), precision_bits: int = DEFAULT_PRECISION_BITS) -> list:
    return [refine(p, lo, hi, tol, precision_bits)[0] for lo, hi in isolate(p)]


def complex_root_count(p: UPoly) -> int:
    """Number of distinct non-real roots."""
    sf = squarefree_part(p)
    return degree(sf) - len(isolate(sf))


def rational_roots(p: UPoly, precision_bits: int = 0) -> list[Fraction]:
    """Exact rational roots, found by refining each real root far enough to
    recognize it as a fraction whose denominator divides the leading coefficient."""
    prim = primitive(squarefree_part(p))
    if not prim:
        return []
    lead = abs(int(prim[-1]))
    const = abs(int(prim[0]))
    if const == 0:
        rest = trim(prim[1:])
        return sorted(set([Fraction(0)] + rational_roots(rest)))
    out = []
    tol = Fraction(1, 4 * lead * lead + 4)
    for lo, hi in isolate(prim):
        _, (a, b) = refine(prim, lo, hi, tol, max(precision_bits, 64))
        cand = ((a + b) / 2).limit_denominator(lead)
        if cand.denominator <= lead and eval_exact(prim, cand) == 0:
            out.append(cand)
    return out
