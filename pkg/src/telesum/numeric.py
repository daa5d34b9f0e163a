"""Arbitrary-precision evaluation and verification.

Series at argument 1 converge only like a power of k, so the partial
sum is completed with an analytic tail: the term's asymptotic expansion
``t_k ~ C k^alpha (1 + c_1/k + ...)`` is computed from the exact ratio
recurrence, and the remainder is summed with Hurwitz-zeta values
(Euler-Maclaurin at a large second argument).  The reported tail
estimate is validated by doubling the truncation point and confirming
the change stays below it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mp

from .asymptotics import Constraint, RE_POSITIVE, NOT_NONPOS_INT
from .gammaprod import GammaQuotient
from .polys import MultiPoly, RatFunc
from .statements import IdentityStatement
from .terms import HyperTerm, LinArg, SeriesSpec

GUARD_DIGITS = 15

DEFAULT_DIGITS = 40
DEFAULT_TOL = mpmath.mpf("1e-25")
DEFAULT_SAMPLES = 20
DEFAULT_SEED = 42


class NumericError(RuntimeError):
    pass


class PoleError(NumericError):
    pass


class ConvergenceError(NumericError):
    pass


class SamplerError(NumericError):
    pass


# ---------------------------------------------------------------------------
# numeric evaluation of exact data
# ---------------------------------------------------------------------------

def to_mpc(value) -> mpmath.mpc:
    if isinstance(value, Fraction):
        return mp.mpc(mp.mpf(value.numerator) / mp.mpf(value.denominator))
    if isinstance(value, complex):
        return mp.mpc(value.real, value.imag)
    return mp.mpc(value)


def poly_eval(p: MultiPoly, assign: Dict[str, mpmath.mpc]) -> mpmath.mpc:
    total = mp.mpc(0)
    for e, c in p.terms.items():
        v = to_mpc(c)
        for name, ei in zip(p.variables, e):
            if ei:
                v *= assign[name] ** ei
        total += v
    return total


def ratfunc_eval(r: RatFunc, assign: Dict[str, mpmath.mpc]) -> mpmath.mpc:
    den = poly_eval(r.den, assign)
    if den == 0:
        raise PoleError("denominator vanishes: %s" % r.den)
    return poly_eval(r.num, assign) / den


def linarg_eval(arg: LinArg, assign: Dict[str, mpmath.mpc],
                n=0, k=0) -> mpmath.mpc:
    total = to_mpc(arg.const)
    for name, c in arg.params.items():
        total += to_mpc(c) * assign[name]
    if arg.n_coeff:
        total += arg.n_coeff * mp.mpc(n)
    if arg.k_coeff:
        total += arg.k_coeff * mp.mpc(k)
    return total


def _pole_distance(z: mpmath.mpc) -> mpmath.mpf:
    """Distance to the nonpositive integers."""
    re, im = mp.re(z), mp.im(z)
    if re > mp.mpf("0.5"):
        return abs(im) + re
    nearest = mp.floor(re + mp.mpf("0.5"))
    if nearest > 0:
        nearest = mp.mpf(0)
    return abs(z - nearest)


def gamma_eval(z, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """Gamma(z) to about `digits` significant digits.

    Refuses arguments within 10^(-digits/2) of a pole instead of
    returning a huge, meaningless value.
    """
    with mp.workdps(digits + GUARD_DIGITS):
        zz = to_mpc(z)
        if _pole_distance(zz) < mp.mpf(10) ** (-(digits // 2)):
            raise PoleError("Gamma argument %s too close to a pole" % zz)
        return mp.gamma(zz)


def gq_eval(gq: GammaQuotient, assign: Dict[str, mpmath.mpc],
            n: int = 0, digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """Numeric value of a Gamma quotient at a parameter point."""
    with mp.workdps(digits + GUARD_DIGITS):
        if gq.is_zero():
            return mp.mpc(0)
        value = ratfunc_eval(gq.pref, dict(assign, n=mp.mpc(n)))
        if gq.sign_n and n % 2:
            value = -value
        for arg in gq.numer:
            value *= gamma_eval(linarg_eval(arg, assign, n=n), digits)
        for arg in gq.denom:
            value /= gamma_eval(linarg_eval(arg, assign, n=n), digits)
        for arg in gq.refl_numer:
            value *= mp.pi / mp.sin(mp.pi * linarg_eval(arg, assign, n=n))
        for arg in gq.refl_denom:
            value /= mp.pi / mp.sin(mp.pi * linarg_eval(arg, assign, n=n))
        return value


def term_eval(t: HyperTerm, assign: Dict[str, mpmath.mpc], n: int, k: int,
              digits: int = DEFAULT_DIGITS) -> mpmath.mpc:
    """|t(n, k)| via log-Gamma products; k may be large."""
    with mp.workdps(digits + GUARD_DIGITS):
        logv = mp.mpc(0)
        sign = mp.mpc(1)
        for arg, var in t.numer_poch:
            x = linarg_eval(arg, assign, n=n)
            m = k if var == "k" else n
            logv += mp.loggamma(x + m) - mp.loggamma(x)
        for arg, var in t.denom_poch:
            x = linarg_eval(arg, assign, n=n)
            m = k if var == "k" else n
            logv -= mp.loggamma(x + m) - mp.loggamma(x)
        for base, var in t.const_powers:
            m = k if var == "k" else n
            b = assign[base] if isinstance(base, str) else to_mpc(base)
            sign *= b ** m
        pref = ratfunc_eval(t.prefactor, assign)
        return pref * sign * mp.e ** logv


# ---------------------------------------------------------------------------
# series evaluation with analytic tail completion
# ---------------------------------------------------------------------------

@dataclass
class SeriesValue:
    value: mpmath.mpc
    truncation_index: int
    tail_estimate: mpmath.mpf
    first_order_tail: mpmath.mpf
    margin: mpmath.mpf
    validated: bool
    doubling_change: mpmath.mpf
    terminating: bool = False


def _hurwitz_large_a(s: mpmath.mpc, a: mpmath.mpc, eps) -> mpmath.mpc:
    """zeta(s, a) for large positive a by Euler-Maclaurin (no base sum)."""
    out = a ** (1 - s) / (s - 1) + a ** (-s) / 2
    prev = None
    for i in range(1, 80):
        term = (mp.bernoulli(2 * i) / mp.factorial(2 * i)) \
            * mp.rf(s, 2 * i - 1) * a ** (1 - s - 2 * i)
        out += term
        at = abs(term)
        if at < eps:
            break
        if prev is not None and at > prev:
            break
        prev = at
    return out


def _binom_series(alpha: mpmath.mpc, upto: int) -> List[mpmath.mpc]:
    """Coefficients of (1+w)^alpha."""
    out = [mp.mpc(1)]
    for i in range(1, upto + 1):
        out.append(out[-1] * (alpha - i + 1) / i)
    return out


def _poly_from_roots(roots: Sequence[mpmath.mpc], upto: int) -> List[mpmath.mpc]:
    """Coefficients of prod (1 + r w), truncated."""
    out = [mp.mpc(1)]
    for r in roots:
        new = out + [mp.mpc(0)]
        for i in range(len(out), 0, -1):
            new[i] += r * out[i - 1]
        out = new[:upto + 1]
    while len(out) < upto + 1:
        out.append(mp.mpc(0))
    return out


def _series_inverse(d: List[mpmath.mpc], upto: int) -> List[mpmath.mpc]:
    inv = [1 / d[0]]
    for i in range(1, upto + 1):
        acc = mp.mpc(0)
        for j in range(1, min(i, len(d) - 1) + 1):
            acc += d[j] * inv[i - j]
        inv.append(-acc / d[0])
    return inv


def _series_mul(a: List[mpmath.mpc], b: List[mpmath.mpc],
                upto: int) -> List[mpmath.mpc]:
    out = [mp.mpc(0)] * (upto + 1)
    for i, ai in enumerate(a[:upto + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[:upto + 1 - i]):
            out[i + j] += ai * bj
    return out


def _tail_expansion_coeffs(uppers, lowers, alpha, J: int) -> List[mpmath.mpc]:
    """c_0..c_J with t_k ~ C k^alpha sum c_j k^-j (c_0 = 1)."""
    N = _poly_from_roots(uppers, J + 1)
    D = _poly_from_roots(list(lowers) + [mp.mpc(1)], J + 1)
    rho = _series_mul(N, _series_inverse(D, J + 1), J + 1)
    binoms = {}
    c = [mp.mpc(1)]
    for m in range(2, J + 2):
        acc = mp.mpc(0)
        for j in range(0, m - 1):
            if j not in binoms:
                binoms[j] = _binom_series(alpha - j, J + 1)
            acc += c[j] * (binoms[j][m - j] - rho[m - j])
        c.append(acc / (m - 1))
    return c


def _choose_plan(digits: int, radius: float):
    """(K, J) minimizing work subject to (R_eff/K)^J < 10^-(digits+14)."""
    best = None
    r0 = max(1.0, radius)
    for J in (16, 24, 32, 48, 64, 80):
        reff = max(r0, (J + 2) / 6.0)
        K = int(reff * 10 ** ((digits + 14.0) / J)) + 8
        K = max(K, 48, int(3 * r0) + 8)
        if J > K:
            continue
        cost = K * 1.0 + J * J * 1.2 + J * 30.0
        if best is None or cost < best[0]:
            best = (cost, K, J)
    return best[1], best[2]


def pfq1_eval(spec: SeriesSpec, assign: Dict[str, mpmath.mpc],
              digits: int = DEFAULT_DIGITS, n: int = 0) -> SeriesValue:
    """Evaluate a pFq at argument 1 to about `digits` digits.

    Terminating series are summed exactly; otherwise the convergence
    margin Re(sum lower - sum upper) must be positive (checked here,
    with refusal on violation).  The returned truncation index is the
    final one after the doubling validation pass.
    """
    if spec.argument != 1:
        raise NumericError("series evaluation is implemented for argument 1")
    with mp.workdps(digits + GUARD_DIGITS):
        uppers = [linarg_eval(u, assign, n=n) for u in spec.upper]
        lowers = [linarg_eval(l, assign, n=n) for l in spec.lower]
        eps_term = mp.mpf(10) ** (-(digits + 8))
        for l in lowers:
            if _pole_distance(l) < mp.mpf(10) ** (-(digits // 2)):
                raise PoleError("lower parameter %s at a Pochhammer pole" % l)
        # terminating upper parameter: exact finite sum
        m_term = _terminating_index(uppers, digits)
        if m_term is not None:
            total = mp.mpc(0)
            t = mp.mpc(1)
            for k in range(m_term + 1):
                total += t
                t = t * _ratio_at(uppers, lowers, k)
            return SeriesValue(total, m_term, mp.mpf(0), mp.mpf(0),
                               mp.inf, True, mp.mpf(0), terminating=True)
        if len(uppers) < len(lowers) + 1:
            return _eval_superfast(uppers, lowers, digits)
        alpha = sum(uppers, mp.mpc(0)) - sum(lowers, mp.mpc(0)) - 1
        margin = -mp.re(alpha) - 1
        if margin <= 0:
            raise ConvergenceError(
                "series does not converge: margin %s <= 0" % mp.nstr(margin, 6))
        radius = max([abs(u) for u in uppers + lowers] + [1.0])
        K, J = _choose_plan(digits, float(radius))
        K = _regime_index(uppers, lowers, alpha, K)
        coeffs = _tail_expansion_coeffs(uppers, lowers, alpha, J)
        partial = mp.mpc(0)
        t = mp.mpc(1)
        for k in range(K):
            partial += t
            t = t * _ratio_at(uppers, lowers, k)
        # t is now t_K
        val1, tail1 = _complete(partial + t, t, K, alpha, coeffs, digits)
        first_order = abs(t) * K / margin
        # doubling validation
        for k in range(K, 2 * K):
            partial += t
            t = t * _ratio_at(uppers, lowers, k)
        val2, tail2 = _complete(partial + t, t, 2 * K, alpha, coeffs, digits)
        change = abs(val2 - val1)
        validated = change <= tail1 + abs(val2) * mp.mpf(10) ** (-(digits + 2)) \
            + mp.mpf(10) ** (-(digits + 2))
        return SeriesValue(val2, 2 * K, tail2, first_order, margin,
                           validated, change)


def _terminating_index(uppers, digits) -> Optional[int]:
    tol = mp.mpf(10) ** (-(digits // 2))
    best = None
    for u in uppers:
        re = mp.re(u)
        if re > tol or abs(mp.im(u)) > tol:
            continue
        m = int(mp.floor(-re + mp.mpf("0.5")))
        if abs(u + m) < tol:
            best = m if best is None else min(best, m)
    return best


def _ratio_at(uppers, lowers, k: int) -> mpmath.mpc:
    num = mp.mpc(1)
    for u in uppers:
        num *= (u + k)
    den = mp.mpc(k + 1)
    for l in lowers:
        den *= (l + k)
    return num / den


def _eval_superfast(uppers, lowers, digits) -> SeriesValue:
    """p <= q case: terms die factorially, plain summation suffices."""
    eps = mp.mpf(10) ** (-(digits + 10))
    total = mp.mpc(0)
    t = mp.mpc(1)
    k = 0
    while k < 10 ** 7:
        total += t
        t = t * _ratio_at(uppers, lowers, k)
        k += 1
        if abs(t) < eps * (1 + abs(total)) and k > 8:
            break
    return SeriesValue(total + t, k, abs(t), abs(t), mp.inf, True, mp.mpf(0))


def _regime_index(uppers, lowers, alpha, K: int) -> int:
    """Smallest power-of-two multiple of K where the term ratio is within
    1% of its first-order model 1 + alpha/k."""
    for _ in range(24):
        r = _ratio_at(uppers, lowers, K)
        model = 1 + alpha / K
        if model != 0 and abs(r / model - 1) <= mp.mpf("0.01"):
            return K
        K *= 2
    raise ConvergenceError("term ratio never entered the asymptotic regime")


def _complete(partial, t_K, K, alpha, coeffs, digits):
    """partial sum through index K, plus analytic tail from K+1 on."""
    phi = mp.mpc(0)
    Kc = mp.mpc(K)
    for j, c in enumerate(coeffs):
        phi += c * Kc ** (-j)
    C0 = t_K / (Kc ** alpha * phi)
    eps = mp.mpf(10) ** (-(digits + 12))
    tail = mp.mpc(0)
    last = mp.mpf(0)
    a = mp.mpc(K + 1)
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        z = _hurwitz_large_a(j - alpha, a, eps)
        contrib = C0 * c * z
        tail += contrib
        last = abs(contrib)
    tail_err = last * 4 + abs(C0) * mp.mpf(10) ** (-(digits + 10))
    return partial + tail, tail_err


# ---------------------------------------------------------------------------
# identity verification
# ---------------------------------------------------------------------------

@dataclass
class PointResult:
    index: int
    assignment: Dict[str, mpmath.mpc]
    lhs: mpmath.mpc
    rhs: mpmath.mpc
    abs_err: mpmath.mpf
    rel_err: mpmath.mpf
    truncations: List[int]
    tails: List[mpmath.mpf]
    min_margin: float

    def to_json(self, digits: int) -> dict:
        return {
            "index": self.index,
            "point": {name: [mp.nstr(mp.re(v), 17), mp.nstr(mp.im(v), 17)]
                      for name, v in sorted(self.assignment.items())},
            "lhs": _cstr(self.lhs, digits),
            "rhs": _cstr(self.rhs, digits),
            "abs_err": mp.nstr(self.abs_err, 8),
            "rel_err": mp.nstr(self.rel_err, 8),
            "truncation_indices": self.truncations,
            "tail_estimates": [mp.nstr(t, 6) for t in self.tails],
            "constraint_margin": "%.6f" % self.min_margin,
        }


def _cstr(z, digits):
    return [mp.nstr(mp.re(z), digits), mp.nstr(mp.im(z), digits)]


@dataclass
class VerificationReport:
    identity_id: str
    seed: int
    digits: int
    tol: mpmath.mpf
    samples_requested: int
    points: List[PointResult]
    passed: bool
    worst_index: Optional[int]
    failure: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "identity": self.identity_id,
            "seed": self.seed,
            "digits": self.digits,
            "tolerance": mp.nstr(mp.mpf(self.tol), 6),
            "samples": self.samples_requested,
            "passed": self.passed,
            "worst_index": self.worst_index,
            "failure": self.failure,
            "points": [p.to_json(self.digits) for p in self.points],
        }


def _collect_pole_args(identity: IdentityStatement):
    gamma_args, lower_args, refl_args, denominators = [], [], [], []
    gqs = [coeff for coeff, _ in identity.lhs] + [identity.rhs]
    for gq in gqs:
        gamma_args.extend(gq.numer + gq.denom)
        refl_args.extend(gq.refl_numer + gq.refl_denom)
        denominators.append(gq.pref.den)
        denominators.append(gq.pref.num)
    for _, spec in identity.lhs:
        lower_args.extend(spec.lower)
    return gamma_args, lower_args, refl_args, denominators


def sample_admissible_points(identity: IdentityStatement, count: int,
                             seed: int, digits: int,
                             margin: float = 0.15,
                             pole_distance: float = 0.1) -> List[dict]:
    """Rejection-sample parameter points inside the identity's region.

    Real parts in [-2, 4], imaginary parts in [-1/2, 1/2]; constraints
    must hold with the given margin and every Gamma / lower-Pochhammer
    argument must stay away from poles.
    """
    names = identity.param_names()
    rng = random.Random(seed)
    gamma_args, lower_args, refl_args, denominators = \
        _collect_pole_args(identity)
    points = []
    attempts = 0
    max_attempts = 2000 * count
    with mp.workdps(digits + GUARD_DIGITS):
        while len(points) < count and attempts < max_attempts:
            attempts += 1
            assign = {name: mp.mpc(rng.uniform(-2.0, 4.0),
                                   rng.uniform(-0.5, 0.5)) for name in names}
            if _admissible(identity, assign, gamma_args, lower_args,
                           refl_args, denominators, margin, pole_distance):
                points.append(assign)
    if len(points) < count:
        raise SamplerError(
            "could only find %d of %d admissible points in %d attempts"
            % (len(points), count, attempts))
    return points


def _admissible(identity, assign, gamma_args, lower_args, refl_args,
                denominators, margin, pole_distance) -> bool:
    for c in identity.constraints:
        v = linarg_eval(c.form, assign)
        if c.kind == RE_POSITIVE:
            if mp.re(v) < margin:
                return False
        else:
            if _pole_distance(v) < pole_distance:
                return False
    for arg in gamma_args:
        if _pole_distance(linarg_eval(arg, assign)) < pole_distance:
            return False
    for arg in lower_args:
        if _pole_distance(linarg_eval(arg, assign)) < pole_distance:
            return False
    for arg in refl_args:
        v = linarg_eval(arg, assign)
        if abs(v - mp.floor(mp.re(v) + mp.mpf("0.5"))) < pole_distance:
            return False
    for den in denominators:
        if den.is_constant():
            continue
        if abs(poly_eval(den, assign)) < mp.mpf("0.02"):
            return False
    for _, spec in identity.lhs:
        if spec.terminating_order() is not None:
            continue
        su = sum((linarg_eval(u, assign) for u in spec.upper), mp.mpc(0))
        sl = sum((linarg_eval(l, assign) for l in spec.lower), mp.mpc(0))
        if mp.re(sl - su) < margin:
            return False
    return True


def identity_min_margin(identity, assign) -> float:
    vals = [1.0]
    for c in identity.constraints:
        vals.append(c.satisfied_margin(assign))
    return float(min(vals))


def verify_identity(identity: IdentityStatement,
                    samples: int = DEFAULT_SAMPLES,
                    seed: int = DEFAULT_SEED,
                    digits: int = DEFAULT_DIGITS,
                    tol=DEFAULT_TOL) -> VerificationReport:
    """Check |lhs - rhs| / max(1, |rhs|) < tol at sampled admissible points.

    The two sides go through independent paths: series summation with
    tail completion on the left, Gamma-function products on the right.
    """
    tol = mp.mpf(tol)
    try:
        points = sample_admissible_points(identity, samples, seed, digits)
    except SamplerError as err:
        return VerificationReport(identity.ident_id, seed, digits, tol,
                                  samples, [], False, None, str(err))
    results = []
    with mp.workdps(digits + GUARD_DIGITS):
        for idx, assign in enumerate(points):
            truncs, tails = [], []
            lhs = mp.mpc(0)
            for coeff, spec in identity.lhs:
                sv = pfq1_eval(spec, assign, digits)
                truncs.append(sv.truncation_index)
                tails.append(sv.tail_estimate)
                lhs += gq_eval(coeff, assign, 0, digits) * sv.value
            rhs = gq_eval(identity.rhs, assign, 0, digits)
            abs_err = abs(lhs - rhs)
            rel_err = abs_err / max(mp.mpf(1), abs(rhs))
            results.append(PointResult(idx, assign, lhs, rhs, abs_err,
                                       rel_err,
                                       truncs, tails,
                                       identity_min_margin(identity, assign)))
    worst = max(results, key=lambda p: p.rel_err) if results else None
    passed = bool(results) and all(p.rel_err < tol for p in results)
    return VerificationReport(identity.ident_id, seed, digits, tol, samples,
                              results, passed,
                              worst.index if worst else None)


# ---------------------------------------------------------------------------
# limit probes
# ---------------------------------------------------------------------------

@dataclass
class ProbeReport:
    name: str
    n_values: List[int]
    errors: List[mpmath.mpf]
    final_tolerance: mpmath.mpf
    passed: bool
    empirical_orders: List[mpmath.mpf]

    def to_json(self) -> dict:
        return {
            "probe": self.name,
            "n_values": self.n_values,
            "errors": [mp.nstr(e, 8) for e in self.errors],
            "final_tolerance": mp.nstr(self.final_tolerance, 6),
            "empirical_orders": [mp.nstr(o, 6) for o in self.empirical_orders],
            "passed": self.passed,
        }


def limit_probe(name: str, family: Callable[[int], mpmath.mpc],
                target: mpmath.mpc, n_values: Sequence[int],
                final_tolerance, digits: int = 20) -> ProbeReport:
    """Evaluate an n-indexed family against its claimed limit.

    Passes when the errors decrease monotonically and the last one is
    below the tolerance; exact-zero error sequences pass trivially.
    """
    tol = mp.mpf(final_tolerance)
    with mp.workdps(digits + GUARD_DIGITS):
        errors = [abs(family(n) - target) for n in n_values]
        floor = mp.mpf(10) ** (-(digits - 4))
        decreasing = all(errors[i + 1] < errors[i] or
                         (errors[i + 1] <= floor and errors[i] <= floor)
                         for i in range(len(errors) - 1))
        orders = []
        for i in range(len(errors) - 1):
            if errors[i + 1] > 0 and errors[i] > 0:
                num = mp.log(errors[i] / errors[i + 1])
                den = mp.log(mp.mpf(n_values[i + 1]) / n_values[i])
                orders.append(num / den)
            else:
                orders.append(mp.inf)
        passed = decreasing and errors[-1] < tol
    return ProbeReport(name, list(n_values), errors, tol, passed, orders)
