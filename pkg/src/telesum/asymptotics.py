"""Growth estimates for hypergeometric terms and certificate boundaries.

The single analytic fact used everywhere is the Gamma-ratio estimate
``Gamma(a+v)/Gamma(b+v) ~ v^(a-b)`` as ``v -> infinity``, applied
factorwise.  Exponents are linear forms in the parameters and ``n``;
questions like "is Re(exponent) < 0 under the declared constraints"
are decided by exact Fourier-Motzkin elimination over the real parts,
never by numeric probing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .gammaprod import GammaQuotient
from .polys import RatFunc
from .terms import HyperTerm, LinArg, SeriesSpec, TermError


class AsymptoticsError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------

RE_POSITIVE = "re_positive"
NOT_NONPOS_INT = "not_nonpositive_integer"


@dataclass(frozen=True)
class Constraint:
    """Either Re(form) > 0 or form not in {0, -1, -2, ...}."""
    form: LinArg
    kind: str = RE_POSITIVE

    def __str__(self):
        if self.kind == RE_POSITIVE:
            return "Re(%s) > 0" % self.form
        return "%s not in {0, -1, -2, ...}" % self.form

    def satisfied_margin(self, assignment: dict) -> float:
        """Numeric margin: positive means satisfied with room to spare."""
        v = self.form.eval_params(assignment)
        if self.kind == RE_POSITIVE:
            return float(v.real if hasattr(v, "real") else v)
        re = float(v.real if hasattr(v, "real") else v)
        im = abs(float(v.imag)) if hasattr(v, "imag") else 0.0
        if re > 0.05:
            return 1.0
        nearest = round(re)
        if nearest > 0:
            return 1.0
        dist = abs(re - nearest)
        return max(dist, im)


def dedupe_constraints(cs: Iterable[Constraint]) -> List[Constraint]:
    seen = []
    for c in cs:
        if c not in seen:
            seen.append(c)
    return sorted(seen, key=lambda c: (c.kind, str(c.form)))


# ---------------------------------------------------------------------------
# Fourier-Motzkin over the real parts
# ---------------------------------------------------------------------------

def _form_to_row(form: LinArg) -> Tuple[dict, Fraction]:
    coeffs = dict(form.params)
    if form.n_coeff:
        coeffs["n"] = Fraction(form.n_coeff)
    if form.k_coeff:
        raise AsymptoticsError("decision forms may not contain k: %s" % form)
    return coeffs, form.const


def _fm_infeasible(rows: List[Tuple[dict, Fraction, bool]]) -> bool:
    """True when {row > 0 (strict) / >= 0} has no real solution."""
    rows = [(dict(c), v, s) for c, v, s in rows]
    while True:
        var = None
        for c, _, _ in rows:
            for name in c:
                var = name
                break
            if var:
                break
        if var is None:
            break
        lowers, uppers, rest = [], [], []
        for c, v, s in rows:
            a = c.pop(var, Fraction(0))
            if a > 0:
                lowers.append((a, c, v, s))
            elif a < 0:
                uppers.append((a, c, v, s))
            else:
                rest.append((c, v, s))
        new_rows = rest
        for (al, cl, vl, sl) in lowers:
            for (au, cu, vu, su) in uppers:
                # al*x + L > 0 and au*x + U > 0 with au < 0
                # => combined: (-au)*L + al*U > 0
                comb = {}
                for name, coef in cl.items():
                    comb[name] = comb.get(name, Fraction(0)) + (-au) * coef
                for name, coef in cu.items():
                    comb[name] = comb.get(name, Fraction(0)) + al * coef
                comb = {k2: v2 for k2, v2 in comb.items() if v2 != 0}
                const = (-au) * vl + al * vu
                new_rows.append((comb, const, sl or su))
        rows = new_rows
    for c, v, s in rows:
        if s and v <= 0:
            return True
        if not s and v < 0:
            return True
    return False


def _constraint_rows(constraints: Iterable[Constraint],
                     include_n: bool) -> List[Tuple[dict, Fraction, bool]]:
    rows = []
    for c in constraints:
        if c.kind != RE_POSITIVE:
            continue
        coeffs, const = _form_to_row(c.form)
        rows.append((coeffs, const, True))
    if include_n:
        rows.append(({"n": Fraction(1)}, Fraction(0), False))
    return rows


def implies_negative(form: LinArg, constraints: Iterable[Constraint]) -> bool:
    """constraints (with n >= 0) force Re(form) < 0."""
    rows = _constraint_rows(constraints, include_n=True)
    coeffs, const = _form_to_row(form)
    rows.append((coeffs, const, False))       # assume Re(form) >= 0
    return _fm_infeasible(rows)


def implies_positive(form: LinArg, constraints: Iterable[Constraint]) -> bool:
    rows = _constraint_rows(constraints, include_n=True)
    coeffs, const = _form_to_row(-form)
    rows.append((coeffs, const, False))       # assume Re(form) <= 0
    return _fm_infeasible(rows)


# ---------------------------------------------------------------------------
# k -> infinity exponent calculus
# ---------------------------------------------------------------------------

POWER = "power"
SUPER_GROWTH = "super_growth"
SUPER_DECAY = "super_decay"


@dataclass(frozen=True)
class AsymptoticEstimate:
    """value ~ constant * v^exponent (or super-polynomial behavior)."""
    kind: str
    exponent: Optional[LinArg] = None
    constant: Optional[GammaQuotient] = None
    oscillatory: bool = False

    def __mul__(self, other: "AsymptoticEstimate") -> "AsymptoticEstimate":
        kinds = {self.kind, other.kind}
        if kinds == {SUPER_GROWTH, SUPER_DECAY}:
            raise AsymptoticsError("indeterminate super-growth product")
        for special in (SUPER_GROWTH, SUPER_DECAY):
            if special in kinds:
                return AsymptoticEstimate(
                    special, oscillatory=self.oscillatory or other.oscillatory)
        const = None
        if self.constant is not None and other.constant is not None:
            const = self.constant * other.constant
        return AsymptoticEstimate(POWER, self.exponent + other.exponent, const,
                                  self.oscillatory or other.oscillatory)


def k_exponent(t: HyperTerm) -> AsymptoticEstimate:
    """Factorwise Gamma-ratio estimate of t as k -> infinity.

    Pochhammers in n and the prefactor only feed the constant, which may
    therefore depend on n.
    """
    up_k, low_k = t.pochhammers("k")
    up_n, low_n = t.pochhammers("n")
    osc = False
    for base, var in t.const_powers:
        if var != "k":
            continue
        if isinstance(base, str):
            raise AsymptoticsError(
                "cannot classify symbolic base %s^k" % base)
        mag = abs(base)
        if mag > 1:
            return AsymptoticEstimate(SUPER_GROWTH)
        if mag < 1:
            return AsymptoticEstimate(SUPER_DECAY)
        if base != 1:
            osc = True
    if len(up_k) != len(low_k):
        kind = SUPER_GROWTH if len(up_k) > len(low_k) else SUPER_DECAY
        return AsymptoticEstimate(kind, oscillatory=osc)
    expo = LinArg()
    for u in up_k:
        expo = expo + u
    for l in low_k:
        expo = expo - l
    const = GammaQuotient(list(low_k), list(up_k), t.prefactor)
    for x in up_n:
        const = const * GammaQuotient([x + LinArg(n_coeff=1)], [x])
    for x in low_n:
        const = const * GammaQuotient([x], [x + LinArg(n_coeff=1)])
    return AsymptoticEstimate(POWER, expo, const, osc)


def ratfunc_estimate(r: RatFunc) -> AsymptoticEstimate:
    """Leading behavior of a rational function of k."""
    dn = r.num.degree("k")
    dd = r.den.degree("k")
    if dn < 0:
        raise AsymptoticsError("zero rational function has no estimate")
    lead = RatFunc(r.num.coeff_of("k", dn), r.den.coeff_of("k", dd))
    return AsymptoticEstimate(POWER, LinArg.num(dn - dd),
                              GammaQuotient(pref=lead))


# ---------------------------------------------------------------------------
# series convergence at argument 1
# ---------------------------------------------------------------------------

def term_power_exponent(spec: SeriesSpec) -> LinArg:
    """E with term_k ~ const * k^E: sum(upper) - sum(lower) - 1."""
    e = LinArg.num(-1)
    for u in spec.upper:
        e = e + u
    for l in spec.lower:
        e = e - l
    return e


def convergence_constraints(spec: SeriesSpec) -> List[Constraint]:
    """Conditions for absolute convergence of the series at argument 1.

    Saalschutzian-type cases with a numerically forced exponent need no
    Re condition; otherwise Re(sum lower - sum upper) > 0 is emitted,
    along with nonpositive-integer exclusions for every lower parameter.
    """
    if spec.argument != 1:
        raise AsymptoticsError("convergence analysis is for argument 1")
    out: List[Constraint] = []
    if spec.terminating_order() is None:
        e = term_power_exponent(spec)
        if e.is_rational():
            if e.const >= -1:
                raise AsymptoticsError(
                    "series diverges: term exponent %s >= -1" % e.const)
            # numerically forced, absolutely convergent for all parameters
        else:
            margin = -(e + 1)    # Re(sum lower - sum upper) > 0
            out.append(Constraint(margin, RE_POSITIVE))
    for l in spec.lower:
        out.append(Constraint(l.drop_n(), NOT_NONPOS_INT))
    return dedupe_constraints(out)


# ---------------------------------------------------------------------------
# certificate boundaries
# ---------------------------------------------------------------------------

ZERO = "zero"
FINITE = "finite"
DIVERGENT = "divergent"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class BoundaryData:
    value_at_0: GammaQuotient
    classification: str                 # zero | finite | divergent | unknown
    limit_at_inf: Optional[GammaQuotient]
    exponent: Optional[LinArg] = None


def _is_terminating_term(t: HyperTerm) -> bool:
    up_k, _ = t.pochhammers("k")
    return any(u.n_coeff < 0 or u.is_nonpositive_integer() for u in up_k)


def term_value_at_k0(t: HyperTerm) -> GammaQuotient:
    """t at k = 0 as Gamma data in n (k-Pochhammers collapse to 1)."""
    up_n, low_n = t.pochhammers("n")
    out = GammaQuotient(pref=t.prefactor)
    for x in up_n:
        out = out * GammaQuotient([x + LinArg(n_coeff=1)], [x])
    for x in low_n:
        out = out * GammaQuotient([x], [x + LinArg(n_coeff=1)])
    for base, var in t.const_powers:
        if var == "n":
            if base == -1:
                out = GammaQuotient(out.numer, out.denom, out.pref,
                                    not out.sign_n)
            elif base != 1:
                raise AsymptoticsError(
                    "boundary value with %s^n is not Gamma data" % (base,))
    return out


def boundary_limits(t: HyperTerm, R: RatFunc,
                    constraints: Sequence[Constraint] = ()) -> BoundaryData:
    """Boundary data of the certificate term G = R * t.

    The k = 0 value is exact; the k -> infinity limit is classified from
    the Gamma-ratio exponent of G, using only the declared constraints.
    An undecidable sign is reported as "unknown", never guessed.
    """
    r0 = R.subs("k", Fraction(0))
    if r0.is_zero():
        value0 = GammaQuotient.zero()
    else:
        value0 = term_value_at_k0(t) * r0
    if R.is_zero():
        return BoundaryData(GammaQuotient.zero(), ZERO, GammaQuotient.zero())
    if _is_terminating_term(t):
        # the term vanishes for large k, so G does too
        return BoundaryData(value0, ZERO, GammaQuotient.zero())
    est = k_exponent(t) * ratfunc_estimate(R)
    if est.kind == SUPER_DECAY:
        return BoundaryData(value0, ZERO, GammaQuotient.zero())
    if est.kind == SUPER_GROWTH:
        return BoundaryData(value0, DIVERGENT, None)
    expo = est.exponent
    if expo == LinArg():
        if est.oscillatory:
            return BoundaryData(value0, UNKNOWN, None, expo)
        return BoundaryData(value0, FINITE, est.constant, expo)
    if implies_negative(expo, constraints):
        return BoundaryData(value0, ZERO, GammaQuotient.zero(), expo)
    if implies_positive(expo, constraints):
        return BoundaryData(value0, DIVERGENT, None, expo)
    return BoundaryData(value0, UNKNOWN, None, expo)


# ---------------------------------------------------------------------------
# termwise n -> infinity limits
# ---------------------------------------------------------------------------

TERM = "term"
DELTA = "delta"


@dataclass(frozen=True)
class TermwiseLimit:
    kind: str                       # term | delta
    term: Optional[HyperTerm]       # for kind == term
    delta_value: Optional[RatFunc]  # series value for kind == delta
    consumed: Tuple[Constraint, ...]
    notes: Tuple[str, ...] = ()


def n_limit_termwise(t: HyperTerm,
                     constraints: Sequence[Constraint] = ()) -> TermwiseLimit:
    """Syntactic termwise limit of t(n, k) as n -> infinity.

    Matched Pochhammer pairs (one upper, one lower, equal positive n
    coefficient) cancel to 1; the convergence condition of the limit
    series is recorded as the consumed side condition.  A term whose
    only n dependence sits in lower Pochhammers collapses to the
    Kronecker delta at k = 0.  Anything else is refused: this is a
    rewrite rule with a declared validity condition, not a prover.
    """
    up_n, low_n = t.pochhammers("n")
    if up_n or low_n:
        raise AsymptoticsError(
            "termwise limits expect a bare series term, found Pochhammers in n")
    for base, var in t.const_powers:
        if var == "n" and base != 1:
            raise AsymptoticsError("termwise limit with %s^n unsupported" % (base,))
    up_k, low_k = t.pochhammers("k")
    ups = sorted([u for u in up_k if u.n_coeff], key=LinArg.sort_key)
    lows = sorted([l for l in low_k if l.n_coeff], key=LinArg.sort_key)
    if not ups and not lows:
        return TermwiseLimit(TERM, t, None, ())
    matched = []
    rest_lows = list(lows)
    for u in list(ups):
        partner = None
        for l in rest_lows:
            if l.n_coeff == u.n_coeff and u.n_coeff > 0:
                partner = l
                break
        if partner is None:
            raise AsymptoticsError(
                "unmatched growing Pochhammer %s blocks the termwise limit" % u)
        matched.append((u, partner))
        rest_lows.remove(partner)
        ups.remove(u)
    if ups:
        raise AsymptoticsError("unmatched upper n Pochhammers: %s" % ups)
    if rest_lows and any(l.n_coeff < 0 for l in rest_lows):
        raise AsymptoticsError(
            "lower Pochhammer with negative n coefficient has no n limit")

    if rest_lows:
        # remaining lower (x + c n)_k factors blow up for k >= 1: delta case
        value = t.prefactor
        note = ("termwise limit is delta_{k,0}: dominated for n >= n0 with "
                "Re(%s) > 0 at n = n0" % _delta_domination_form(t))
        return TermwiseLimit(DELTA, None, value, (), (note,))
    drop_up = [u for u, _ in matched]
    drop_low = [l for _, l in matched]
    keep_numer = []
    for arg, var in t.numer_poch:
        if var == "k" and arg in drop_up:
            drop_up.remove(arg)
        else:
            keep_numer.append((arg, var))
    keep_denom = []
    for arg, var in t.denom_poch:
        if var == "k" and arg in drop_low:
            drop_low.remove(arg)
        else:
            keep_denom.append((arg, var))
    limit_term = HyperTerm(keep_numer, keep_denom, t.const_powers, t.prefactor)
    consumed = _limit_series_constraint(limit_term)
    note = ("matched Pochhammer pairs cancelled: %s"
            % ", ".join("(%s | %s)" % (u, l) for u, l in matched))
    return TermwiseLimit(TERM, limit_term, None, tuple(consumed), (note,))


def _delta_domination_form(t: HyperTerm) -> LinArg:
    """Exponent form whose positivity dominates the tail (Eq-8 style bound)."""
    up_k, low_k = t.pochhammers("k")
    e = LinArg.num(0)
    for l in low_k:
        e = e + l.drop_n()
    for u in up_k:
        e = e - u.drop_n()
    return e


def _limit_series_constraint(limit_term: HyperTerm) -> List[Constraint]:
    # the term's own Pochhammer lists already contain the factorial as (1)_k
    up_k, low_k = limit_term.pochhammers("k")
    e = LinArg.num(0)
    for u in up_k:
        e = e + u
    for l in low_k:
        e = e - l
    if e.is_rational():
        if e.const >= -1:
            raise AsymptoticsError("limit series diverges")
        return []
    return [Constraint(-(e + 1), RE_POSITIVE)]


# ---------------------------------------------------------------------------
# n -> infinity limits of Gamma quotients
# ---------------------------------------------------------------------------

def gamma_limit_n(gq: GammaQuotient, constraints: Sequence[Constraint] = ()):
    """(classification, value) of lim_{n->infinity} of a Gamma quotient.

    Balanced quotients (same number of Gamma(x + n) factors above and
    below) have limit n^(sum x_up - sum x_low); the n-free part carries
    through.  Classification follows the declared constraints.
    """
    gq = gq.absorb_n_prefactor()
    if gq.is_zero():
        return FINITE, GammaQuotient.zero()
    if gq.sign_n:
        return UNKNOWN, None
    n_up, base_up = _split_n_args(gq.numer)
    n_low, base_low = _split_n_args(gq.denom)
    if any(a.n_coeff != 1 for a in n_up + n_low):
        return UNKNOWN, None
    if len(n_up) != len(n_low):
        return (DIVERGENT, None) if len(n_up) > len(n_low) else \
            (ZERO, GammaQuotient.zero())
    expo = LinArg()
    for a in n_up:
        expo = expo + a.drop_n()
    for a in n_low:
        expo = expo - a.drop_n()
    base = GammaQuotient(base_up, base_low, gq.pref,
                         refl_numer=gq.refl_numer, refl_denom=gq.refl_denom)
    if expo == LinArg():
        return FINITE, base
    if implies_negative(expo, constraints):
        return ZERO, GammaQuotient.zero()
    if implies_positive(expo, constraints):
        return DIVERGENT, None
    return UNKNOWN, None


def _split_n_args(args):
    with_n = [a for a in args if a.n_coeff]
    without = [a for a in args if not a.n_coeff]
    return with_n, without
