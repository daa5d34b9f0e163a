"""Gosper summation, Zeilberger's creative telescoping, and WZ certificates.

The Gosper core works on a multiplicative normal form
``r(k) = z * (A(k)/B(k)) * (C(k+1)/C(k))`` with ``gcd(A(k), B(k+j)) = 1``
for every integer j >= 0.  Whenever the input arrives as a product of
factors linear in ``k`` (always the case for terms built from Pochhammer
symbols) the shift alignment is read off the factor arguments directly;
otherwise it falls back to integer roots of a resultant.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .polys import (MultiPoly, RatFunc, dispersion, linear_factors_in,
                    poly_gcd, poly_lcm, solve_linear)
from .terms import HyperTerm, LinArg


class TelescopeError(RuntimeError):
    """No certificate of the requested shape exists (or was found)."""


@dataclass(frozen=True)
class GosperResult:
    summable: bool
    certificate: Optional[RatFunc] = None


@dataclass(frozen=True)
class Recurrence:
    """c_0(n) t(n,k) + ... + c_J(n) t(n+J,k) = Delta_k (R(n,k) t(n,k))."""
    order: int
    coeffs: Tuple[MultiPoly, ...]
    certificate: RatFunc

    def coeff_ratfuncs(self) -> List[RatFunc]:
        return [RatFunc(c) for c in self.coeffs]


# ---------------------------------------------------------------------------
# factored rational functions in k
# ---------------------------------------------------------------------------

class _Factored:
    """num/den lists of monic linear factors in k, plus a k-free scale."""

    __slots__ = ("num", "den", "scale")

    def __init__(self, num=(), den=(), scale: RatFunc = None):
        self.num = list(num)
        self.den = list(den)
        self.scale = scale if scale is not None else RatFunc.const(1)

    def copy(self) -> "_Factored":
        return _Factored(self.num, self.den, self.scale)

    def mul(self, other: "_Factored") -> "_Factored":
        out = _Factored(self.num + other.num, self.den + other.den,
                        self.scale * other.scale)
        out.cancel()
        return out

    def cancel(self):
        i = 0
        while i < len(self.num):
            f = self.num[i]
            if f in self.den:
                self.den.remove(f)
                self.num.pop(i)
            else:
                i += 1

    def shift_n(self, offset: int) -> "_Factored":
        def sh(arg: LinArg) -> LinArg:
            return LinArg(arg.params, arg.const + arg.n_coeff * offset,
                          arg.n_coeff, arg.k_coeff)
        return _Factored([sh(f) for f in self.num], [sh(f) for f in self.den],
                         self.scale.shift("n", offset))

    def num_poly(self) -> MultiPoly:
        return _prod_poly(self.num)

    def den_poly(self) -> MultiPoly:
        return _prod_poly(self.den)

    def to_ratfunc(self) -> RatFunc:
        return self.scale * RatFunc(self.num_poly(), self.den_poly())


def _prod_poly(args: Sequence[LinArg]) -> MultiPoly:
    out = MultiPoly.const(1)
    for a in args:
        out = out * a.to_poly()
    return out


def _split_k_factors(args: Sequence[LinArg]):
    """Separate factors containing k from k-free ones."""
    k_facts, consts = [], []
    for a in args:
        if a.k_coeff == 1:
            k_facts.append(a)
        elif a.k_coeff == 0:
            consts.append(a)
        else:
            raise TelescopeError("factor %s has k-coefficient %d" %
                                 (a, a.k_coeff))
    return k_facts, consts


def _term_factored_ratio(t: HyperTerm, var: str) -> _Factored:
    num, den = t.shift_quotient_factored(var)
    scale = RatFunc.const(1)
    for base, pvar in t.const_powers:
        if pvar == var:
            scale = scale * (RatFunc.var(base) if isinstance(base, str)
                             else RatFunc.const(base))
    return _Factored(num, den, scale)


# ---------------------------------------------------------------------------
# Gosper-Petkovsek decomposition
# ---------------------------------------------------------------------------

def _gp_from_factors(num_args: Sequence[LinArg], den_args: Sequence[LinArg],
                     scale: RatFunc):
    """Decompose from factor lists.  Returns (A, B, C) MultiPolys."""
    f1_k, f1_c = _split_k_factors(num_args)
    f2_k, f2_c = _split_k_factors(den_args)
    for a in f1_c:
        scale = scale * a.to_ratfunc()
    for a in f2_c:
        scale = scale / a.to_ratfunc()
    # candidate shifts from pairwise argument differences
    cands = set()
    for u in f1_k:
        for v in f2_k:
            d = u - v
            if d.is_rational() and d.const.denominator == 1 and d.const >= 0:
                cands.add(int(d.const))
    c_factors: List[LinArg] = []
    for j in sorted(cands):
        i = 0
        while i < len(f1_k):
            u = f1_k[i]
            shifted = u - j
            if shifted in f2_k:
                f1_k.pop(i)
                f2_k.remove(shifted)
                for s in range(1, j + 1):
                    c_factors.append(u - s)
            else:
                i += 1
    A = _prod_poly(f1_k) * scale.num
    B = _prod_poly(f2_k) * scale.den
    C = _prod_poly(c_factors)
    return A, B, C


def _gp_from_polys(num: MultiPoly, den: MultiPoly):
    """Resultant-based fallback decomposition for raw rational input."""
    f1, f2 = num, den
    c_poly = MultiPoly.const(1)
    for j in sorted(dispersion(f1, f2, "k")):
        g = poly_gcd(f1, f2.shift("k", j))
        if g.degree("k") <= 0:
            continue
        f1 = f1.exact_div(g)
        f2 = f2.exact_div(g.shift("k", -j))
        for s in range(1, j + 1):
            c_poly = c_poly * g.shift("k", -s)
    return f1, f2, c_poly


def gp_decompose(r: RatFunc):
    """Gosper-Petkovsek form of a rational function of k.

    Returns MultiPolys (A, B, C) with
    ``r = (A/B) * (C(k+1)/C(k))`` and ``gcd(A(k), B(k+j)) = 1`` for all
    integers j >= 0.
    """
    num, den = r.num, r.den
    fn = linear_factors_in(num, "k")
    fd = linear_factors_in(den, "k")
    if fn is not None and fd is not None:
        lead_n, roots_n = fn
        lead_d, roots_d = fd
        try:
            num_args = [LinArg.from_poly(s) + LinArg.sym("k") for s in roots_n]
            den_args = [LinArg.from_poly(s) + LinArg.sym("k") for s in roots_d]
            scale = RatFunc(lead_n, lead_d)
            return _gp_from_factors(num_args, den_args, scale)
        except Exception:
            pass
    return _gp_from_polys(num, den)


# ---------------------------------------------------------------------------
# the Gosper key equation
# ---------------------------------------------------------------------------

def _poly_coeffs_in_k(p: MultiPoly, upto: int) -> List[MultiPoly]:
    return [p.coeff_of("k", i) for i in range(upto + 1)]


def _degree_bound(A: MultiPoly, Bm: MultiPoly, rhs_deg: int) -> Optional[int]:
    """Classical two-case bound for the polynomial ansatz degree."""
    N = A.degree("k")
    M = Bm.degree("k")
    lcA = A.leading_coeff_in("k")
    lcB = Bm.leading_coeff_in("k")
    candidates = set()
    if N != M or lcA != lcB:
        candidates.add(rhs_deg - max(N, M))
    elif N == 0:
        candidates.add(rhs_deg - N + 1)
        candidates.add(0)
    else:
        candidates.add(rhs_deg - N + 1)
        sigma = RatFunc(Bm.coeff_of("k", N - 1) - A.coeff_of("k", N - 1), lcA)
        if sigma.is_constant():
            v = sigma.constant_value()
            if v.denominator == 1 and v >= 0:
                candidates.add(int(v))
    valid = [d for d in candidates if d >= 0]
    return max(valid) if valid else None


def _key_equation_columns(A: MultiPoly, Bm: MultiPoly, deg: int):
    """Column polynomials A(k)*(k+1)^i - B(k-1)*k^i for the x ansatz."""
    k = MultiPoly.var("k")
    cols = []
    for i in range(deg + 1):
        cols.append(A * (k + 1) ** i - Bm * k ** i)
    return cols


def _solve_gosper_system(A: MultiPoly, Bm: MultiPoly, rhs_fixed: MultiPoly,
                         rhs_unknown: Sequence[MultiPoly] = ()):
    """Solve A x(k+1) - B(k-1) x(k) = rhs_fixed + sum_j c_j rhs_unknown[j].

    Returns (x_coeffs, c_values) as RatFuncs, or None.
    """
    rhs_deg = rhs_fixed.degree("k")
    for u in rhs_unknown:
        rhs_deg = max(rhs_deg, u.degree("k"))
    if rhs_deg < 0:
        rhs_deg = 0
    d = _degree_bound(A, Bm, rhs_deg)
    if d is None:
        return None
    cols = _key_equation_columns(A, Bm, d)
    max_deg = max([c.degree("k") for c in cols] + [rhs_deg, 0])
    nx = d + 1
    nc = len(rhs_unknown)
    rows = []
    rhs_vec = []
    for power in range(max_deg + 1):
        row = [RatFunc(c.coeff_of("k", power)) for c in cols]
        row += [RatFunc(-u.coeff_of("k", power)) for u in rhs_unknown]
        rows.append(row)
        rhs_vec.append(RatFunc(rhs_fixed.coeff_of("k", power)))
    sol = solve_linear(rows, rhs_vec)
    if sol is None:
        return None
    return sol[:nx], sol[nx:nx + nc]


def _x_to_ratfunc(x_coeffs: Sequence[RatFunc]) -> RatFunc:
    k = RatFunc.var("k")
    out = RatFunc.const(0)
    power = RatFunc.const(1)
    for i, c in enumerate(x_coeffs):
        if not c.is_zero():
            out = out + c * power
        if i + 1 < len(x_coeffs):
            power = power * k
    return out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def gosper(r: RatFunc) -> GosperResult:
    """Indefinite summation for a term with shift quotient ``r``.

    When summable, the certificate R satisfies ``R(k+1) r(k) - R(k) = 1``
    exactly, so that g = R t is an antidifference of t.
    """
    if r.is_zero():
        raise ValueError("shift quotient must be nonzero")
    A, B, C = gp_decompose(r)
    Bm = B.shift("k", -1)
    sol = _solve_gosper_system(A, Bm, C)
    if sol is None:
        return GosperResult(False, None)
    x_coeffs, _ = sol
    x = _x_to_ratfunc(x_coeffs)
    if x.is_zero():
        return GosperResult(False, None)
    R = RatFunc(Bm) * x / RatFunc(C)
    return GosperResult(True, R)


def _rho_list(t: HyperTerm, order: int) -> List[_Factored]:
    """rho_j = t(n+j,k)/t(n,k) for j = 0..order, as factored quotients."""
    sigma = _term_factored_ratio(t, "n")
    rhos = [_Factored()]
    for j in range(order):
        rhos.append(rhos[-1].mul(sigma.shift_n(j)))
    return rhos


def _common_denominator(rhos: List[_Factored]):
    """Multiset lcm of the denominators; returns (den_list, numerators u_j)."""
    den: List[LinArg] = []
    for rho in rhos:
        remaining = list(den)
        for f in rho.den:
            if f in remaining:
                remaining.remove(f)
            else:
                den.append(f)
    u_polys = []
    scales = []
    for rho in rhos:
        extra = list(den)
        for f in rho.den:
            extra.remove(f)
        u_polys.append(_prod_poly(rho.num) * _prod_poly(extra))
        scales.append(rho.scale)
    return den, u_polys, scales


def zeilberger(t: HyperTerm, max_order: int = 3) -> Recurrence:
    """Minimal-order telescoping recurrence for a proper term.

    Searches orders J = 1, 2, ..., max_order and returns the first
    success, with content-free coefficients and a canonical sign.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    r_k = _term_factored_ratio(t, "k")
    for J in range(1, max_order + 1):
        rec = _zeilberger_order(t, r_k, J)
        if rec is not None:
            return rec
    raise TelescopeError("no telescoping recurrence up to order %d" % max_order)


def _zeilberger_order(t: HyperTerm, r_k: _Factored, J: int) -> Optional[Recurrence]:
    rhos = _rho_list(t, J)
    den_list, u_polys, scales = _common_denominator(rhos)
    # fold the k-free scale of each rho into its numerator polynomial
    u_rf = [RatFunc(u) * s for u, s in zip(u_polys, scales)]
    den_scale = MultiPoly.const(1)
    for u in u_rf:
        den_scale = poly_lcm(den_scale, u.den)
    u_final = [u.num * den_scale.exact_div(u.den) for u in u_rf]
    p1_list = list(den_list)

    # ratio of h(k) = t(n,k)/p1(k)
    p1_shift = [f + f.k_coeff for f in p1_list]
    rh = _Factored(r_k.num + p1_list, r_k.den + p1_shift, r_k.scale)
    rh.cancel()
    A, B, C = _gp_from_factors(rh.num, rh.den, rh.scale)
    Bm = B.shift("k", -1)
    sol = _solve_gosper_system(A, Bm, C * u_final[J],
                               [C * u for u in u_final[:J]])
    if sol is None:
        return None
    x_coeffs, c_low = sol
    x = _x_to_ratfunc(x_coeffs)
    coeffs = list(c_low) + [RatFunc.const(1)]
    p1_poly = _prod_poly(p1_list) * den_scale
    R = RatFunc(Bm) * x / (RatFunc(C) * RatFunc(p1_poly))
    return _normalize_recurrence(coeffs, R, J)


def _normalize_recurrence(coeffs: List[RatFunc], R: RatFunc, J: int) -> Recurrence:
    den = MultiPoly.const(1)
    for c in coeffs:
        den = poly_lcm(den, c.den)
    polys = [c.num * den.exact_div(c.den) for c in coeffs]
    content = MultiPoly((), {})
    for p in polys:
        content = poly_gcd(content, p)
        if content.is_constant() and not content.is_zero():
            break
    if content.is_zero():
        raise TelescopeError("degenerate recurrence with zero coefficients")
    polys = [p.exact_div(content) for p in polys]
    sign = 1
    if polys[J].is_zero():
        raise TelescopeError("leading recurrence coefficient vanished")
    if polys[J].leading_coeff() < 0:
        sign = -1
        polys = [-p for p in polys]
    scale = RatFunc(den) / RatFunc(content) * sign
    return Recurrence(J, tuple(polys), R * scale)


def wz_certificate(t: HyperTerm) -> RatFunc:
    """Certificate R with t(n+1,k) - t(n,k) = Delta_k (R(n,k) t(n,k))."""
    sigma = _term_factored_ratio(t, "n")
    w = sigma.to_ratfunc() - RatFunc.const(1)
    if w.is_zero():
        return RatFunc.const(0)
    p1_list = list(sigma.den)
    p1_poly = _prod_poly(p1_list) * sigma.scale.den
    p0 = w.num * p1_poly.exact_div(w.den)

    r_k = _term_factored_ratio(t, "k")
    p1_shift = [f + f.k_coeff for f in p1_list]
    rh = _Factored(r_k.num + p1_list, r_k.den + p1_shift, r_k.scale)
    rh.cancel()
    A, B, C = _gp_from_factors(rh.num, rh.den, rh.scale)
    Bm = B.shift("k", -1)
    sol = _solve_gosper_system(A, Bm, C * p0)
    if sol is None:
        raise TelescopeError("difference t(n+1,k) - t(n,k) is not "
                             "Gosper-summable in k")
    x = _x_to_ratfunc(sol[0])
    R = RatFunc(Bm) * x / (RatFunc(C) * RatFunc(p1_poly))
    return R


def verify_certificate(t: HyperTerm, rec: Recurrence) -> bool:
    """Exact check of sum_j c_j rho_j = R(n,k+1) r_k - R(n,k)."""
    r_k = t.shift_quotient("k")
    sigma = t.shift_quotient("n")
    lhs = RatFunc.const(0)
    rho = RatFunc.const(1)
    for j, c in enumerate(rec.coeffs):
        lhs = lhs + RatFunc(c) * rho
        if j < rec.order:
            rho = rho * sigma.shift("n", j)
    R = rec.certificate
    rhs = R.shift("k", 1) * r_k - R
    return lhs == rhs
