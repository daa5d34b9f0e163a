"""Signed products of Gamma factors with linear arguments.

A :class:`GammaQuotient` is ``pref * (-1)^(n?) * prod Gamma(numer) /
prod Gamma(denom)`` with an optional list of reflection markers, each
standing for a factor ``pi/sin(pi*z)``.  Simplification cancels equal
arguments, reduces constants into a fixed shift window via
``Gamma(z+1) = z Gamma(z)``, folds integer Gammas into the rational
prefactor, and records reflection pairs ``Gamma(z) Gamma(1-z)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .polys import MultiPoly, RatFunc, linear_factors_in
from .terms import LinArg, TermError


class GammaError(ValueError):
    pass


def _check_arg(arg: LinArg):
    if arg.k_coeff:
        raise GammaError("Gamma argument may not contain k: %s" % arg)


class GammaQuotient:
    __slots__ = ("numer", "denom", "pref", "sign_n",
                 "refl_numer", "refl_denom")

    def __init__(self, numer: Iterable[LinArg] = (), denom: Iterable[LinArg] = (),
                 pref=1, sign_n: bool = False,
                 refl_numer: Iterable[LinArg] = (), refl_denom: Iterable[LinArg] = ()):
        numer = tuple(numer)
        denom = tuple(denom)
        for a in numer + denom:
            _check_arg(a)
        if not isinstance(pref, RatFunc):
            pref = RatFunc.const(pref)
        if pref.depends_on("k"):
            raise GammaError("prefactor may not contain k")
        if pref.is_zero():
            numer = denom = ()
            refl_numer = refl_denom = ()
            sign_n = False
        key = lambda a: a.sort_key()
        object.__setattr__(self, "numer", tuple(sorted(numer, key=key)))
        object.__setattr__(self, "denom", tuple(sorted(denom, key=key)))
        object.__setattr__(self, "pref", pref)
        object.__setattr__(self, "sign_n", bool(sign_n))
        object.__setattr__(self, "refl_numer", tuple(sorted(refl_numer, key=key)))
        object.__setattr__(self, "refl_denom", tuple(sorted(refl_denom, key=key)))

    def __setattr__(self, *a):
        raise AttributeError("GammaQuotient is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def one(cls) -> "GammaQuotient":
        return cls()

    @classmethod
    def zero(cls) -> "GammaQuotient":
        return cls(pref=0)

    @classmethod
    def from_ratio(cls, value) -> "GammaQuotient":
        return cls(pref=value)

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.pref.is_zero()

    def is_one(self) -> bool:
        return (not self.numer and not self.denom and not self.sign_n
                and not self.refl_numer and not self.refl_denom
                and self.pref == RatFunc.const(1))

    def depends_on_n(self) -> bool:
        if self.sign_n or self.pref.depends_on("n"):
            return True
        return any(a.n_coeff for a in self.numer + self.denom
                   + self.refl_numer + self.refl_denom)

    # -- algebra ---------------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return GammaQuotient(self.numer, self.denom, self.pref * other,
                                 self.sign_n, self.refl_numer, self.refl_denom)
        if not isinstance(other, GammaQuotient):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return GammaQuotient.zero()
        return GammaQuotient(self.numer + other.numer,
                             self.denom + other.denom,
                             self.pref * other.pref,
                             self.sign_n != other.sign_n,
                             self.refl_numer + other.refl_numer,
                             self.refl_denom + other.refl_denom)

    __rmul__ = __mul__

    def inverse(self) -> "GammaQuotient":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero Gamma quotient")
        return GammaQuotient(self.denom, self.numer, self.pref.inverse(),
                             self.sign_n, self.refl_denom, self.refl_numer)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return self * (RatFunc.const(1) / RatFunc._coerce(other))
        if isinstance(other, GammaQuotient):
            return self * other.inverse()
        return NotImplemented

    def __neg__(self):
        return self * Fraction(-1)

    # -- n-structure --------------------------------------------------------------

    def subs_n(self, m: int) -> "GammaQuotient":
        """Specialize the shift variable to an integer."""
        def fix(args):
            return [LinArg(a.params, a.const + a.n_coeff * m) for a in args]
        pref = self.pref.subs("n", Fraction(m))
        if self.sign_n and m % 2:
            pref = pref * Fraction(-1)
        return GammaQuotient(fix(self.numer), fix(self.denom), pref, False,
                             fix(self.refl_numer), fix(self.refl_denom))

    def shift_ratio_n(self) -> RatFunc:
        """value(n+1)/value(n) as an exact rational function of n."""
        if self.refl_numer or self.refl_denom:
            raise GammaError("shift ratio with reflection factors unsupported")
        out = RatFunc.const(1)
        for a in self.numer:
            out = out * _gamma_shift_ratio(a)
        for a in self.denom:
            out = out / _gamma_shift_ratio(a)
        if not self.pref.is_constant():
            out = out * self.pref.shift("n", 1) / self.pref
        if self.sign_n:
            out = out * Fraction(-1)
        return out

    def absorb_n_prefactor(self) -> "GammaQuotient":
        """Move linear-in-n factors of the prefactor into Gamma pairs.

        ``(n + s)`` in the numerator becomes ``Gamma(s+1+n)/Gamma(s+n)``;
        needed before recognizing an n-indexed quotient as a series term.
        """
        if not self.pref.depends_on("n"):
            return self
        numer = list(self.numer)
        denom = list(self.denom)
        pref_num, extra_n, extra_d = _pull_n_factors(self.pref.num)
        pref_den, extra_n2, extra_d2 = _pull_n_factors(self.pref.den)
        numer += extra_n + extra_d2
        denom += extra_d + extra_n2
        pref = RatFunc(pref_num, pref_den)
        if pref.depends_on("n"):
            raise GammaError("prefactor has non-linear n dependence: %s"
                             % self.pref)
        return GammaQuotient(numer, denom, pref, self.sign_n,
                             self.refl_numer, self.refl_denom)

    # -- equality -------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, GammaQuotient):
            return NotImplemented
        a = gamma_simplify(self)
        b = gamma_simplify(other)
        return (a.numer == b.numer and a.denom == b.denom
                and a.pref == b.pref and a.sign_n == b.sign_n
                and a.refl_numer == b.refl_numer
                and a.refl_denom == b.refl_denom)

    def __hash__(self):
        s = gamma_simplify(self)
        return hash((s.numer, s.denom, s.pref, s.sign_n,
                     s.refl_numer, s.refl_denom))

    def __str__(self):
        return format_gamma_quotient(self)

    def __repr__(self):
        return "GammaQuotient(%s)" % self


def _gamma_shift_ratio(arg: LinArg) -> RatFunc:
    """Gamma(arg at n+1)/Gamma(arg at n)."""
    nu = arg.n_coeff
    if nu == 0:
        return RatFunc.const(1)
    base = arg.to_ratfunc()
    out = RatFunc.const(1)
    if nu > 0:
        for i in range(nu):
            out = out * (base + i)
    else:
        for i in range(1, -nu + 1):
            out = out / (base - i)
    return out


def _pull_n_factors(p: MultiPoly):
    """Split p = rest * prod (n + s_i); returns (rest, numer_args, denom_args).

    Each monic factor (n + s) turns into the Gamma pair
    Gamma(s+1+n)/Gamma(s+n).
    """
    if not p.depends_on("n"):
        return p, [], []
    fact = linear_factors_in(p, "n")
    if fact is None:
        raise GammaError("cannot factor %s into linear n factors" % p)
    lead, roots = fact
    numer, denom = [], []
    for s in roots:
        s_arg = LinArg.from_poly(s)
        if s_arg.n_coeff or s_arg.k_coeff:
            raise GammaError("nested shift variable in factor %s" % s)
        numer.append(s_arg + 1 + LinArg(n_coeff=1))
        denom.append(s_arg + LinArg(n_coeff=1))
    return lead, numer, denom


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

def _cancel(numer: List[LinArg], denom: List[LinArg]):
    i = 0
    while i < len(numer):
        if numer[i] in denom:
            denom.remove(numer[i])
            numer.pop(i)
        else:
            i += 1


def _window_reduce(arg: LinArg):
    """Normalize the rational constant; returns (new_arg | None, factors, invert).

    ``factors`` is a list of LinArgs whose product multiplies the side the
    argument sits on (invert=False) or divides it (invert=True).  A None
    argument means the Gamma factor disappeared into the prefactor.
    """
    c = arg.const
    if arg.is_rational():
        if c.denominator == 1:
            if c <= 0:
                return arg, [], False      # pole; leave untouched
            # Gamma(m) = (m-1)!
            f = Fraction(1)
            for i in range(1, int(c)):
                f *= i
            return None, [LinArg.num(f)] if f != 1 else [], False
        target_low, target_high = Fraction(0), Fraction(1)
    else:
        target_low, target_high = Fraction(0), Fraction(1)
    shift = 0
    frac = c - int(c)
    if frac < 0:
        frac += 1
    # want const to become frac in [0, 1)
    shift = int(c - frac)
    if shift == 0:
        return arg, [], False
    new = LinArg(arg.params, c - shift, arg.n_coeff, arg.k_coeff)
    factors = []
    if shift > 0:
        for i in range(1, shift + 1):
            factors.append(LinArg(arg.params, c - i, arg.n_coeff, arg.k_coeff))
        return new, factors, False
    for i in range(0, -shift):
        factors.append(LinArg(arg.params, c + i, arg.n_coeff, arg.k_coeff))
    return new, factors, True


def gamma_simplify(gq: GammaQuotient) -> GammaQuotient:
    """Canonical form: cancel, record reflections, reduce shift windows.

    Rewrite order (fixed so the form is unique): cancel equal arguments,
    detect reflection pairs on the raw arguments, shift every remaining
    constant into [0, 1) (integer Gammas become factorials), cancel again.
    """
    if gq.is_zero():
        return GammaQuotient.zero()
    numer = list(gq.numer)
    denom = list(gq.denom)
    refl_n = list(gq.refl_numer)
    refl_d = list(gq.refl_denom)
    pref = gq.pref
    _cancel(numer, denom)

    for args, refl in ((numer, refl_n), (denom, refl_d)):
        i = 0
        while i < len(args):
            partner = LinArg.num(1) - args[i]
            found = None
            for j in range(len(args)):
                if j != i and args[j] == partner:
                    found = j
                    break
            if found is None:
                i += 1
                continue
            z = min(args[i], partner, key=LinArg.sort_key)
            hi = max(i, found)
            lo = min(i, found)
            args.pop(hi)
            args.pop(lo)
            refl.append(z)
            i = 0

    new_numer: List[LinArg] = []
    new_denom: List[LinArg] = []
    for src, dst, in_numer in ((numer, new_numer, True),
                               (denom, new_denom, False)):
        for arg in src:
            new, factors, invert = _window_reduce(arg)
            if new is not None:
                dst.append(new)
            for f in factors:
                # invert=False: factors multiply the Gamma's own side
                multiply = (in_numer == (not invert))
                fv = RatFunc.const(f.const) if f.is_rational() else f.to_ratfunc()
                pref = pref * fv if multiply else pref / fv
    _cancel(new_numer, new_denom)
    _cancel(refl_n, refl_d)
    if pref.is_zero():
        return GammaQuotient.zero()
    return GammaQuotient(new_numer, new_denom, pref, gq.sign_n, refl_n, refl_d)


def format_gamma_quotient(gq: GammaQuotient) -> str:
    if gq.is_zero():
        return "0"
    nparts: List[str] = []
    if gq.sign_n:
        nparts.append("pow(-1,n)")
    if not (gq.pref.is_constant() and gq.pref.constant_value() == 1):
        nparts.append("(%s)" % gq.pref)
    nparts += ["Gamma(%s)" % a for a in gq.numer]
    nparts += ["pi/sin(pi*(%s))" % a for a in gq.refl_numer]
    dparts = ["Gamma(%s)" % a for a in gq.denom]
    dparts += ["pi/sin(pi*(%s))" % a for a in gq.refl_denom]
    num = "*".join(nparts) if nparts else "1"
    if not dparts:
        return num
    if len(dparts) == 1 and not dparts[0].startswith("pi"):
        return "%s/%s" % (num, dparts[0])
    return "%s/(%s)" % (num, "*".join(dparts))
