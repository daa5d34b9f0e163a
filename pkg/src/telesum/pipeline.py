"""End-to-end derivation of summation identities.

Two strategies share one skeleton.  A telescoping recurrence for the
shifted term t(n,k) is normalized to the pure difference form
``F(n+1,k) - F(n,k) = G(n,k+1) - G(n,k)`` with ``F = lambda(n) t``.
Summing over k >= 0 gives ``S(n+1) - S(n) = lim_k G - G(n,0)``:

* when the boundary data vanishes, S is constant in n and the n -> oo
  limit of S(0) yields a closed form (WZ constancy);
* when the k -> oo limit of G is a finite Gamma quotient, the steps
  accumulate into a second hypergeometric series before the limit is
  taken (telescoped summation).

Terminating families (upper parameter -n) collapse at n = 0 instead of
n -> oo and produce exact product closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

from .asymptotics import (Constraint, RE_POSITIVE, NOT_NONPOS_INT,
                          AsymptoticsError, BoundaryData, DELTA, DIVERGENT,
                          FINITE, TERM, UNKNOWN, ZERO, boundary_limits,
                          convergence_constraints, dedupe_constraints,
                          gamma_limit_n, n_limit_termwise)
from .gammaprod import GammaError, GammaQuotient, gamma_simplify
from .parsing import (parse_gamma_quotient, parse_linarg, parse_ratfunc,
                      parse_series)
from .polys import MultiPoly, RatFunc, linear_factors_in
from .statements import (IdentityStatement, ProofStep, ProofTrace,
                         constraint_to_json)
from .telescope import Recurrence, TelescopeError, verify_certificate, \
    zeilberger
from .terms import HyperTerm, LinArg, SeriesSpec, TermError, term_from_series

STAGE_PARSE = "parse"
STAGE_TELESCOPING = "telescoping"
STAGE_ASYMPTOTICS = "asymptotics"
STAGE_NUMERIC = "numeric"


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__("[%s] %s" % (stage, message))


# ---------------------------------------------------------------------------
# prefactor normalization
# ---------------------------------------------------------------------------

def normalize_to_telescoping(t: HyperTerm, rec: Recurrence):
    """Rewrite an order-1 recurrence as a pure difference equation.

    Solves lambda(n+1)/lambda(n) = -c1(n)/c0(n) by factoring both
    coefficients into factors linear in n, so lambda is a Gamma
    quotient.  Returns (F, G_certificate, lambda) with F = lambda * t
    as a hypergeometric term (Pochhammer-normalized so lambda(0) = 1
    inside F; the returned Gamma quotient carries the full lambda).
    """
    if rec.order != 1:
        raise PipelineError(STAGE_TELESCOPING,
                            "prefactor normalization needs an order-1 "
                            "recurrence, got order %d" % rec.order)
    c0, c1 = rec.coeffs
    lam = _solve_gamma_prefactor(-RatFunc(c1), RatFunc(c0))
    ratio = lam.shift_ratio_n()
    if ratio * RatFunc(c0) + RatFunc(c1) != RatFunc.const(0):
        raise PipelineError(STAGE_TELESCOPING,
                            "prefactor ratio check failed")
    F = t * _poch_normalized(lam)
    G_cert = -rec.certificate / RatFunc(c0)
    rho_F = F.shift_quotient("n")
    r_k = F.shift_quotient("k")
    if rho_F - 1 != G_cert.shift("k", 1) * r_k - G_cert:
        raise PipelineError(STAGE_TELESCOPING,
                            "normalized difference form failed its "
                            "independent certificate recheck")
    return F, G_cert, lam


def _solve_gamma_prefactor(num: RatFunc, den: RatFunc) -> GammaQuotient:
    """lambda with lambda(n+1)/lambda(n) = num/den as a Gamma quotient."""
    ratio = num / den
    if ratio.depends_on("k"):
        raise PipelineError(STAGE_TELESCOPING, "prefactor ratio contains k")
    fn = linear_factors_in(ratio.num, "n")
    fd = linear_factors_in(ratio.den, "n")
    if fn is None or fd is None:
        raise PipelineError(
            STAGE_TELESCOPING,
            "recurrence coefficients do not factor into linear n factors; "
            "the prefactor is not expressible as a Gamma quotient")
    lead_n, roots_n = fn
    lead_d, roots_d = fd
    lead = RatFunc(lead_n, lead_d)
    if not lead.is_constant():
        raise PipelineError(
            STAGE_TELESCOPING,
            "prefactor ratio has a parameter-dependent leading factor %s; "
            "lambda would need a non-Gamma power" % lead)
    zeta = lead.constant_value()
    sign_n = False
    if zeta == -1:
        sign_n = True
    elif zeta != 1:
        raise PipelineError(
            STAGE_TELESCOPING,
            "prefactor ratio has constant leading factor %s; lambda would "
            "need a %s^n power, which is not a Gamma quotient" % (zeta, zeta))
    try:
        numer = [LinArg.from_poly(s) + LinArg(n_coeff=1) for s in roots_n]
        denom = [LinArg.from_poly(s) + LinArg(n_coeff=1) for s in roots_d]
    except TermError as err:
        raise PipelineError(STAGE_TELESCOPING, str(err))
    return GammaQuotient(numer, denom, 1, sign_n)


def _poch_normalized(lam: GammaQuotient) -> HyperTerm:
    """lambda(n)/lambda(0) as a hypergeometric term in n."""
    numer = [(LinArg(a.params, a.const), "n") for a in lam.numer]
    denom = [(LinArg(a.params, a.const), "n") for a in lam.denom]
    powers = [(Fraction(-1), "n")] if lam.sign_n else []
    return HyperTerm(numer, denom, powers, 1)


# ---------------------------------------------------------------------------
# telescoped summation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SumDecomposition:
    """S(n) = S(0) + sum_{m<n} step(m), with the step as Gamma data."""
    boundary: BoundaryData
    step: GammaQuotient
    step0: GammaQuotient
    step_series: Optional[SeriesSpec]
    constant: bool
    constraints: Tuple[Constraint, ...]


def telescoped_sum(F: HyperTerm, G_cert: RatFunc,
                   constraints: Sequence[Constraint] = (),
                   prefactor: Optional[GammaQuotient] = None) -> SumDecomposition:
    """Accumulate the boundary data of the difference form into a series.

    With ``prefactor`` given, the step is expressed in the same
    Gamma normalization as S(n) = prefactor(n) * (series sum); without
    it the Pochhammer normalization of F itself is used.
    """
    bd = boundary_limits(F, G_cert, constraints)
    if bd.classification in (DIVERGENT, UNKNOWN):
        raise PipelineError(
            STAGE_ASYMPTOTICS,
            "boundary limit of the certificate term is %s" % bd.classification)
    kappa = prefactor.subs_n(0) if prefactor is not None else None
    limit = bd.limit_at_inf
    value0 = bd.value_at_0
    if kappa is not None:
        limit = limit * kappa if limit is not None else None
        value0 = value0 * kappa
    if limit is None or limit.is_zero():
        step = GammaQuotient.zero() if value0.is_zero() else -value0
    elif value0.is_zero():
        step = limit
    else:
        raise PipelineError(
            STAGE_ASYMPTOTICS,
            "step combines a nonzero boundary value with a nonzero limit; "
            "not a single Gamma quotient")
    if step.is_zero():
        return SumDecomposition(bd, step, GammaQuotient.zero(), None, True,
                                tuple(constraints))
    try:
        step = step.absorb_n_prefactor()
    except GammaError as err:
        raise PipelineError(STAGE_ASYMPTOTICS, str(err))
    step_series = _series_from_step(step)
    extra = convergence_constraints(step_series)
    return SumDecomposition(bd, step, step.subs_n(0), step_series, False,
                            tuple(dedupe_constraints(list(constraints)
                                                     + list(extra))))


def _series_from_step(step: GammaQuotient) -> SeriesSpec:
    """Recognize sum_m step(m)/step(0) as a pFq(1) with a unit upper entry."""
    if step.sign_n:
        raise PipelineError(STAGE_ASYMPTOTICS,
                            "alternating step series is outside pFq(1) form")
    uppers, lowers = [], []
    for a in step.numer:
        if a.n_coeff == 0:
            continue
        if a.n_coeff != 1:
            raise PipelineError(STAGE_ASYMPTOTICS,
                                "step has n coefficient %d" % a.n_coeff)
        uppers.append(a.drop_n())
    for a in step.denom:
        if a.n_coeff == 0:
            continue
        if a.n_coeff != 1:
            raise PipelineError(STAGE_ASYMPTOTICS,
                                "step has n coefficient %d" % a.n_coeff)
        lowers.append(a.drop_n())
    if len(uppers) != len(lowers):
        raise PipelineError(STAGE_ASYMPTOTICS,
                            "step Gamma data is unbalanced in n")
    return SeriesSpec(uppers + [LinArg.num(1)], lowers, 1)


# ---------------------------------------------------------------------------
# base-case limits
# ---------------------------------------------------------------------------

def _gauss_entry(spec: SeriesSpec):
    if len(spec.upper) != 2 or len(spec.lower) != 1 or spec.argument != 1:
        return None
    x, y = spec.upper
    z = spec.lower[0]
    value = GammaQuotient([z, z - x - y], [z - x, z - y])
    cons = [Constraint(z - x - y, RE_POSITIVE),
            Constraint(z, NOT_NONPOS_INT)]
    return value, cons


#: Closed forms the n -> infinity limit may land on.  Extensible: each
#: entry maps a series spec to (GammaQuotient, constraints) or None.
BASE_CASE_TABLE: List[Callable] = [_gauss_entry]


def lookup_base_case(spec: SeriesSpec):
    for entry in BASE_CASE_TABLE:
        hit = entry(spec)
        if hit is not None:
            return hit
    return None


# ---------------------------------------------------------------------------
# full derivation
# ---------------------------------------------------------------------------

@dataclass
class Derivation:
    identity: IdentityStatement
    recurrence: Recurrence
    F: HyperTerm
    G_cert: RatFunc
    prefactor: GammaQuotient
    decomposition: SumDecomposition
    strategy: str
    input_spec: SeriesSpec
    shifted_param: Optional[str]
    shifted_spec: SeriesSpec


def derive_identity(spec: SeriesSpec, shifted_param: Optional[str] = None,
                    max_order: int = 3,
                    ident_id: str = "derived") -> Derivation:
    """Run a full derivation for a series at argument 1.

    ``shifted_param`` names the parameter to be replaced by param + n;
    terminating families (an upper parameter equal to -n already in the
    spec) need no shift.  Every stage failure carries its stage name.
    """
    steps: List[ProofStep] = []
    terminating = any(u == LinArg(n_coeff=-1) for u in spec.upper)
    if terminating and shifted_param:
        raise PipelineError(STAGE_PARSE,
                            "terminating family specs take no shift parameter")
    if not terminating:
        if not shifted_param:
            raise PipelineError(STAGE_PARSE, "a shift parameter is required")
        if shifted_param not in spec.param_names():
            raise PipelineError(
                STAGE_PARSE, "parameter %s does not occur in %s"
                % (shifted_param, spec))
        shifted = spec.subs_param(shifted_param,
                                  LinArg({shifted_param: 1}, 0, 1))
    else:
        shifted = spec

    try:
        constraints0 = convergence_constraints(
            spec if not terminating else _family_member_spec(spec))
    except (AsymptoticsError, TermError) as err:
        raise PipelineError(STAGE_ASYMPTOTICS, str(err))
    steps.append(ProofStep.make(
        "convergence", series=str(shifted),
        constraints="; ".join(str(c) for c in constraints0)))

    try:
        t = term_from_series(shifted)
        rec = zeilberger(t, max_order)
    except (TermError, TelescopeError) as err:
        raise PipelineError(STAGE_TELESCOPING, str(err))
    steps.append(ProofStep.make(
        "recurrence", order=str(rec.order),
        coeffs="; ".join(str(c) for c in rec.coeffs),
        certificate=str(rec.certificate)))

    F, G_cert, lam = normalize_to_telescoping(t, rec)
    steps.append(ProofStep.make("normalize", prefactor=str(lam),
                                certificate=str(G_cert)))

    sd = telescoped_sum(F, G_cert, constraints0, prefactor=lam)
    steps.append(ProofStep.make(
        "boundary", value_at_0=str(sd.boundary.value_at_0),
        classification=sd.boundary.classification,
        limit_at_inf=str(sd.boundary.limit_at_inf)
        if sd.boundary.limit_at_inf is not None else "divergent"))
    all_constraints = list(sd.constraints)

    if terminating:
        return _finish_terminating(spec, shifted, rec, F, G_cert, lam, sd,
                                   steps, all_constraints, ident_id)

    if sd.constant:
        strategy = "wz_constancy"
        steps.append(ProofStep.make("constancy",
                                    statement="sum over k of F(n,k) is "
                                              "independent of n"))
    else:
        strategy = "telescoped_sum"
        steps.append(ProofStep.make(
            "telescope_sum", step=str(sd.step), step0=str(sd.step0),
            step_series=str(sd.step_series)))

    # n -> infinity of S(n) = lambda(n) * (series at shifted parameters)
    lam_cls, lam_limit = gamma_limit_n(lam, all_constraints)
    if lam_cls != FINITE:
        raise PipelineError(
            STAGE_ASYMPTOTICS,
            "prefactor limit in n is %s; the terminal limit of this "
            "derivation is outside the supported exponent calculus" % lam_cls)
    try:
        tl = n_limit_termwise(t, all_constraints)
    except AsymptoticsError as err:
        raise PipelineError(STAGE_ASYMPTOTICS, str(err))
    all_constraints.extend(tl.consumed)
    if tl.kind == DELTA:
        series_limit = GammaQuotient.from_ratio(tl.delta_value)
        steps.append(ProofStep.make(
            "delta_limit", value=str(tl.delta_value),
            notes="; ".join(tl.notes)))
    else:
        limit_spec = _series_of_term(tl.term)
        steps.append(ProofStep.make(
            "termwise_limit", series=str(limit_spec),
            consumed="; ".join(str(c) for c in tl.consumed),
            notes="; ".join(tl.notes)))
        hit = lookup_base_case(limit_spec)
        if hit is None:
            raise PipelineError(
                STAGE_ASYMPTOTICS,
                "no base-case closed form registered for %s" % limit_spec)
        series_limit, base_cons = hit
        all_constraints.extend(base_cons)
        steps.append(ProofStep.make("base_case", series=str(limit_spec),
                                    value=str(series_limit)))
    s_inf = lam_limit * series_limit
    steps.append(ProofStep.make("limit", s_infinity=str(s_inf),
                                prefactor_limit=str(lam_limit)))

    lam0 = lam.subs_n(0)
    constraints = tuple(dedupe_constraints(all_constraints))
    if sd.constant:
        # lam0 * A = S(oo)
        rhs = gamma_simplify(s_inf * lam0.inverse())
        lhs = ((GammaQuotient.one(), spec),)
    else:
        rhs = s_inf
        lhs = ((lam0, spec), (sd.step0, sd.step_series))
    identity = IdentityStatement(ident_id, lhs, rhs, constraints,
                                 source="derived",
                                 trace=ProofTrace(tuple(steps)))
    return Derivation(identity, rec, F, G_cert, lam, sd, strategy,
                      spec, shifted_param, shifted)


def _family_member_spec(spec: SeriesSpec) -> SeriesSpec:
    """A terminating family viewed at generic n (for pole exclusions)."""
    return spec


def _series_of_term(t: HyperTerm) -> SeriesSpec:
    """Invert term_from_series for a bare series term."""
    up_k, low_k = t.pochhammers("k")
    up_n, low_n = t.pochhammers("n")
    if up_n or low_n or t.prefactor != RatFunc.const(1):
        raise PipelineError(STAGE_ASYMPTOTICS,
                            "limit term is not a bare series term: %s" % t)
    lows = list(low_k)
    one = LinArg.num(1)
    if one in lows:
        lows.remove(one)
    else:
        raise PipelineError(STAGE_ASYMPTOTICS,
                            "limit term lacks the factorial factor")
    argument = Fraction(1)
    for base, var in t.const_powers:
        if var == "k":
            if isinstance(base, str):
                raise PipelineError(STAGE_ASYMPTOTICS,
                                    "symbolic power base in limit term")
            argument *= base
    return SeriesSpec(up_k, lows, argument)


def _finish_terminating(spec, shifted, rec, F, G_cert, lam, sd, steps,
                        all_constraints, ident_id) -> Derivation:
    if not sd.constant:
        raise PipelineError(
            STAGE_ASYMPTOTICS,
            "terminating family did not telescope to a constant")
    steps.append(ProofStep.make(
        "terminating_base", statement="S(0) = 1 because the upper "
        "parameter -n vanishes at n = 0"))
    lam0 = lam.subs_n(0)
    rhs = gamma_simplify(lam0 * lam.inverse())
    steps.append(ProofStep.make("closed_form", value=str(rhs)))
    identity = IdentityStatement(
        ident_id, ((GammaQuotient.one(), spec),), rhs,
        tuple(dedupe_constraints(all_constraints)),
        source="derived", trace=ProofTrace(tuple(steps)))
    return Derivation(identity, rec, F, G_cert, lam, sd,
                      "terminating_product", spec, None, shifted)


# ---------------------------------------------------------------------------
# proof JSON
# ---------------------------------------------------------------------------

def proof_json(d: Derivation) -> dict:
    """Machine-checkable proof certificate with a stable key order."""
    sdict = {
        "input": {
            "series": str(d.input_spec),
            "shift": d.shifted_param,
            "shifted_series": str(d.shifted_spec),
        },
        "strategy": d.strategy,
        "recurrence": {
            "order": d.recurrence.order,
            "coeffs": [str(c) for c in d.recurrence.coeffs],
            "certificate": str(d.recurrence.certificate),
        },
        "certificate": str(d.G_cert),
        "prefactor": str(d.prefactor),
        "step_term": str(d.decomposition.step),
        "boundary": {
            "value_at_0": str(d.decomposition.boundary.value_at_0),
            "classification": d.decomposition.boundary.classification,
            "limit_at_inf":
                str(d.decomposition.boundary.limit_at_inf)
                if d.decomposition.boundary.limit_at_inf is not None else None,
        },
        "constraints": [constraint_to_json(c)
                        for c in d.identity.constraints],
        "identity": d.identity.to_json(),
        "numeric_checks": [],
    }
    return sdict


def check_proof_json(doc: dict) -> List[Tuple[str, bool]]:
    """Re-verify an emitted proof from its JSON payload alone.

    Every symbolic claim is parsed back and checked exactly: the
    recurrence certificate, the prefactor ratio, the normalized
    difference form, the boundary classification, and the assembled
    identity's coefficients.
    """
    checks: List[Tuple[str, bool]] = []
    input_spec = parse_series(doc["input"]["series"])
    shift = doc["input"]["shift"]
    shifted = parse_series(doc["input"]["shifted_series"])
    if shift:
        expected = input_spec.subs_param(shift, LinArg({shift: 1}, 0, 1))
        checks.append(("shifted_series_matches", expected == shifted))
    t = term_from_series(shifted)

    coeffs = [parse_ratfunc(s) for s in doc["recurrence"]["coeffs"]]
    cert = parse_ratfunc(doc["recurrence"]["certificate"])
    rec = Recurrence(int(doc["recurrence"]["order"]),
                     tuple(c.num for c in coeffs), cert)
    poly_ok = all(c.den.is_constant() and c.den.constant_value() == 1
                  for c in coeffs)
    checks.append(("recurrence_coeffs_polynomial", poly_ok))
    checks.append(("recurrence_certificate", verify_certificate(t, rec)))

    lam = parse_gamma_quotient(doc["prefactor"])
    c0, c1 = coeffs[0], coeffs[1]
    ratio_ok = lam.shift_ratio_n() * c0 + c1 == RatFunc.const(0)
    checks.append(("prefactor_ratio", ratio_ok))

    G_cert = parse_ratfunc(doc["certificate"])
    F = t * _poch_normalized(lam)
    rho_F = F.shift_quotient("n")
    r_k = F.shift_quotient("k")
    diff_ok = (rho_F - 1 == G_cert.shift("k", 1) * r_k - G_cert)
    checks.append(("difference_form", diff_ok))

    cons = [Constraint(
        __import__("telesum.parsing", fromlist=["parse_linarg"])
        .parse_linarg(c["form"]), c["kind"])
        for c in doc["constraints"]]
    bd = boundary_limits(F, G_cert, cons)
    checks.append(("boundary_classification",
                   bd.classification == doc["boundary"]["classification"]))
    v0 = parse_gamma_quotient(doc["boundary"]["value_at_0"])
    checks.append(("boundary_value_at_0", v0 == bd.value_at_0))
    if doc["boundary"]["limit_at_inf"] is not None:
        lim = parse_gamma_quotient(doc["boundary"]["limit_at_inf"])
        checks.append(("boundary_limit_at_inf",
                       bd.limit_at_inf is not None and lim == bd.limit_at_inf))

    ident = IdentityStatement.from_json(doc["identity"])
    if doc["strategy"] == "telescoped_sum":
        lam0 = lam.subs_n(0)
        checks.append(("lhs_prefactor_coefficient",
                       any(coeff == lam0 for coeff, _ in ident.lhs)))
        step = parse_gamma_quotient(doc["step_term"])
        checks.append(("lhs_step_coefficient",
                       any(coeff == step.subs_n(0)
                           for coeff, _ in ident.lhs)))
    return checks
