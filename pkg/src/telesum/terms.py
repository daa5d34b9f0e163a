"""Hypergeometric terms in two shift variables with symbolic parameters.

A :class:`HyperTerm` is a product of Pochhammer factors with arguments
linear in the parameters and in ``n``, optional constant bases raised to
``k`` or ``n``, and a rational prefactor in the parameters.  Its shift
quotients in both variables are exact rational functions, which is the
property everything downstream relies on.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .polys import MultiPoly, RatFunc, format_poly


class TermError(ValueError):
    """Raised for structurally invalid terms or series."""


class LinArg:
    """Argument of a Pochhammer/Gamma factor: linear form + Z*n + Z*k."""

    __slots__ = ("params", "const", "n_coeff", "k_coeff")

    def __init__(self, params=None, const=0, n_coeff=0, k_coeff=0):
        ps = {}
        for name, coeff in (params or {}).items():
            coeff = Fraction(coeff)
            if coeff:
                ps[name] = coeff
        object.__setattr__(self, "params", ps)
        object.__setattr__(self, "const", Fraction(const))
        object.__setattr__(self, "n_coeff", int(n_coeff))
        object.__setattr__(self, "k_coeff", int(k_coeff))

    def __setattr__(self, *a):
        raise AttributeError("LinArg is immutable")

    # -- constructors ----------------------------------------------------

    @classmethod
    def sym(cls, name: str) -> "LinArg":
        if name == "n":
            return cls(n_coeff=1)
        if name == "k":
            return cls(k_coeff=1)
        return cls({name: 1})

    @classmethod
    def num(cls, value) -> "LinArg":
        return cls(const=value)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            return LinArg(self.params, self.const + other,
                          self.n_coeff, self.k_coeff)
        if not isinstance(other, LinArg):
            return NotImplemented
        ps = dict(self.params)
        for name, c in other.params.items():
            ps[name] = ps.get(name, Fraction(0)) + c
        return LinArg(ps, self.const + other.const,
                      self.n_coeff + other.n_coeff,
                      self.k_coeff + other.k_coeff)

    __radd__ = __add__

    def __neg__(self):
        return LinArg({k: -v for k, v in self.params.items()}, -self.const,
                      -self.n_coeff, -self.k_coeff)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-Fraction(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __eq__(self, other):
        if not isinstance(other, LinArg):
            return NotImplemented
        return (self.params == other.params and self.const == other.const
                and self.n_coeff == other.n_coeff
                and self.k_coeff == other.k_coeff)

    def __hash__(self):
        return hash((frozenset(self.params.items()), self.const,
                     self.n_coeff, self.k_coeff))

    def sort_key(self):
        return (sorted(self.params.items()), self.const,
                self.n_coeff, self.k_coeff)

    # -- structure ----------------------------------------------------------

    def is_rational(self) -> bool:
        return not self.params and not self.n_coeff and not self.k_coeff

    def is_nonpositive_integer(self) -> bool:
        return (self.is_rational() and self.const.denominator == 1
                and self.const <= 0)

    def param_part(self) -> "LinArg":
        """The n- and k-free part."""
        return LinArg(self.params, self.const)

    def drop_n(self) -> "LinArg":
        return LinArg(self.params, self.const, 0, self.k_coeff)

    def subs_param(self, name: str, repl: "LinArg") -> "LinArg":
        if name not in self.params:
            return self
        c = self.params[name]
        base = LinArg({k: v for k, v in self.params.items() if k != name},
                      self.const, self.n_coeff, self.k_coeff)
        scaled = LinArg({k: v * c for k, v in repl.params.items()},
                        repl.const * c,
                        # integer coefficients on shift variables only
                        _int_times(repl.n_coeff, c), _int_times(repl.k_coeff, c))
        return base + scaled

    def to_poly(self) -> MultiPoly:
        p = MultiPoly.const(self.const)
        for name in sorted(self.params):
            p = p + MultiPoly.var(name) * self.params[name]
        if self.n_coeff:
            p = p + MultiPoly.var("n") * self.n_coeff
        if self.k_coeff:
            p = p + MultiPoly.var("k") * self.k_coeff
        return p

    def to_ratfunc(self) -> RatFunc:
        return RatFunc(self.to_poly())

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "LinArg":
        if p.total_degree() > 1:
            raise TermError("argument is not linear: %s" % p)
        params = {}
        const = Fraction(0)
        n_coeff = 0
        k_coeff = 0
        for e, c in p.terms.items():
            if not any(e):
                const = c
                continue
            i = e.index(1)
            name = p.variables[i]
            if name == "n":
                if c.denominator != 1:
                    raise TermError("non-integer n coefficient in %s" % p)
                n_coeff = int(c)
            elif name == "k":
                if c.denominator != 1:
                    raise TermError("non-integer k coefficient in %s" % p)
                k_coeff = int(c)
            else:
                params[name] = c
        return cls(params, const, n_coeff, k_coeff)

    def eval_params(self, assignment: dict, n=0, k=0):
        """Numeric value given parameter assignments (any ring)."""
        total = 0
        for name, c in self.params.items():
            total = total + assignment[name] * c
        total = total + self.const
        if self.n_coeff:
            total = total + self.n_coeff * n
        if self.k_coeff:
            total = total + self.k_coeff * k
        return total

    def __str__(self):
        pieces = []
        for name in sorted(self.params):
            c = self.params[name]
            pieces.append(_signed(c, name))
        if self.const:
            pieces.append(_signed(self.const, ""))
        if self.n_coeff:
            pieces.append(_signed(Fraction(self.n_coeff), "n"))
        if self.k_coeff:
            pieces.append(_signed(Fraction(self.k_coeff), "k"))
        if not pieces:
            return "0"
        out = " ".join(pieces)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]

    def __repr__(self):
        return "LinArg(%s)" % self


def _int_times(i: int, c: Fraction) -> int:
    v = c * i
    if v.denominator != 1:
        raise TermError("shift-variable coefficient must stay integral")
    return int(v)


def _signed(c: Fraction, name: str) -> str:
    sign = "+ " if c >= 0 else "- "
    c = abs(c)
    if not name:
        body = _fs(c)
    elif c == 1:
        body = name
    else:
        body = "%s*%s" % (_fs(c), name)
    return sign + body


def _fs(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else "%d/%d" % (
        q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# hypergeometric terms
# ---------------------------------------------------------------------------

def _check_poch(arg: LinArg, var: str):
    if var not in ("k", "n"):
        raise TermError("Pochhammer variable must be k or n")
    if var == "k" and arg.k_coeff:
        raise TermError("poch(%s, k): argument may not contain k" % arg)
    if var == "n" and (arg.n_coeff or arg.k_coeff):
        raise TermError("poch(%s, n): argument may not contain n or k" % arg)


class HyperTerm:
    """Proper hypergeometric term in (n, k)."""

    __slots__ = ("numer_poch", "denom_poch", "const_powers", "prefactor")

    def __init__(self, numer_poch=(), denom_poch=(), const_powers=(),
                 prefactor: Union[RatFunc, int, Fraction] = 1):
        numer = []
        for arg, var in numer_poch:
            _check_poch(arg, var)
            numer.append((arg, var))
        denom = []
        for arg, var in denom_poch:
            _check_poch(arg, var)
            denom.append((arg, var))
        # cancel identical factors
        numer_s = sorted(numer, key=lambda t: (t[1], t[0].sort_key()))
        denom_s = sorted(denom, key=lambda t: (t[1], t[0].sort_key()))
        i = 0
        while i < len(numer_s):
            if numer_s[i] in denom_s:
                denom_s.remove(numer_s[i])
                numer_s.pop(i)
            else:
                i += 1
        powers = {}
        for base, var in const_powers:
            if var not in ("k", "n"):
                raise TermError("constant power variable must be k or n")
            key = (_power_base(base), var)
            powers[key] = powers.get(key, 0) + 1
        flat = []
        for (base, var), mult in sorted(powers.items(),
                                        key=lambda t: (t[0][1], str(t[0][0]))):
            if isinstance(base, Fraction):
                if base == 1:
                    continue
                newbase = base ** mult
                flat.append((newbase, var))
            else:
                flat.extend([(base, var)] * mult)
        pref = prefactor if isinstance(prefactor, RatFunc) else RatFunc.const(prefactor)
        for v in ("n", "k"):
            if pref.depends_on(v):
                raise TermError("prefactor must be free of n and k")
        object.__setattr__(self, "numer_poch", tuple(numer_s))
        object.__setattr__(self, "denom_poch", tuple(denom_s))
        object.__setattr__(self, "const_powers", tuple(flat))
        object.__setattr__(self, "prefactor", pref)

    def __setattr__(self, *a):
        raise AttributeError("HyperTerm is immutable")

    def __eq__(self, other):
        if not isinstance(other, HyperTerm):
            return NotImplemented
        return (self.numer_poch == other.numer_poch
                and self.denom_poch == other.denom_poch
                and self.const_powers == other.const_powers
                and self.prefactor == other.prefactor)

    def __hash__(self):
        return hash((self.numer_poch, self.denom_poch, self.const_powers,
                     self.prefactor))

    # -- combination -------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, HyperTerm):
            return HyperTerm(self.numer_poch + other.numer_poch,
                             self.denom_poch + other.denom_poch,
                             self.const_powers + other.const_powers,
                             self.prefactor * other.prefactor)
        if isinstance(other, (int, Fraction, RatFunc)):
            return HyperTerm(self.numer_poch, self.denom_poch,
                             self.const_powers, self.prefactor * other)
        return NotImplemented

    __rmul__ = __mul__

    def reciprocal(self) -> "HyperTerm":
        return HyperTerm(self.denom_poch, self.numer_poch,
                         tuple((b if isinstance(b, str) else 1 / b, v)
                               for b, v in self.const_powers),
                         self.prefactor.inverse())

    # -- shift quotients -----------------------------------------------------

    def shift_quotient(self, var: str) -> RatFunc:
        """t(var + 1)/t(var) as a reduced rational function."""
        num, den = self.shift_quotient_factored(var)
        out = RatFunc.const(1)
        for arg in num:
            out = out * arg.to_ratfunc()
        for arg in den:
            out = out / arg.to_ratfunc()
        for base, pvar in self.const_powers:
            if pvar == var:
                if isinstance(base, str):
                    out = out * RatFunc.var(base)
                else:
                    out = out * base
        return out

    def shift_quotient_factored(self, var: str):
        """Numerator/denominator factor lists (LinArgs) of the shift quotient.

        Excludes constant-power contributions; callers that need the full
        quotient use :meth:`shift_quotient`.
        """
        num: list = []
        den: list = []
        for arg, pvar in self.numer_poch:
            _poch_shift_factors(arg, pvar, var, num, den)
        for arg, pvar in self.denom_poch:
            _poch_shift_factors(arg, pvar, var, den, num)
        return num, den

    # -- evaluation -----------------------------------------------------------

    def eval_exact(self, n0: int, k0: int) -> RatFunc:
        """Exact symbolic value at nonnegative integers (n0, k0)."""
        if n0 < 0 or k0 < 0:
            raise TermError("eval_exact needs nonnegative integers")
        out = self.prefactor
        for arg, var in self.numer_poch:
            out = out * _poch_value(arg, var, n0, k0)
        for arg, var in self.denom_poch:
            out = out / _poch_value(arg, var, n0, k0)
        for base, var in self.const_powers:
            expo = k0 if var == "k" else n0
            if isinstance(base, str):
                out = out * (RatFunc.var(base) ** expo)
            else:
                out = out * (Fraction(base) ** expo)
        return out

    # -- inspection -------------------------------------------------------------

    def pochhammers(self, var: str):
        """(numerator args, denominator args) of the Pochhammers in ``var``."""
        return ([a for a, v in self.numer_poch if v == var],
                [a for a, v in self.denom_poch if v == var])

    def depends_on_n(self) -> bool:
        if any(v == "n" for _, v in self.numer_poch + self.denom_poch):
            return True
        if any(v == "n" for _, v in self.const_powers):
            return True
        return any(a.n_coeff for a, _ in self.numer_poch + self.denom_poch)

    def subs_param(self, name: str, repl: LinArg) -> "HyperTerm":
        def conv(pochs):
            return tuple((arg.subs_param(name, repl), var) for arg, var in pochs)
        if self.prefactor.depends_on(name):
            raise TermError("cannot shift a parameter used in the prefactor")
        return HyperTerm(conv(self.numer_poch), conv(self.denom_poch),
                         self.const_powers, self.prefactor)

    def __str__(self):
        return format_term(self)

    def __repr__(self):
        return "HyperTerm(%s)" % self


def _poch_shift_factors(arg: LinArg, pvar: str, var: str, up: list, down: list):
    """Accumulate factors of poch(arg, pvar) under ``var -> var + 1``."""
    if pvar == var:
        # (x)_{v+1}/(x)_v = x + v
        up.append(arg + LinArg.sym(var))
        return
    # shifting the other variable: only matters when arg contains it
    coeff = arg.n_coeff if var == "n" else arg.k_coeff
    if not coeff:
        return
    # (x + c)_v / (x)_v with c = coeff > 0:  prod_{i=0}^{c-1} (x+i+v)/(x+i)
    if coeff > 0:
        for i in range(coeff):
            up.append(arg + i + LinArg.sym(pvar))
            down.append(arg + i)
    else:
        for i in range(1, -coeff + 1):
            up.append(arg - i)
            down.append(arg - i + LinArg.sym(pvar))


def _poch_value(arg: LinArg, var: str, n0: int, k0: int) -> RatFunc:
    m = k0 if var == "k" else n0
    base = arg.to_ratfunc()
    if var == "k":
        base = base.subs("n", Fraction(n0))
    out = RatFunc.const(1)
    for i in range(m):
        out = out * (base + i)
    return out


def format_term(t: HyperTerm) -> str:
    nparts = []
    if not (t.prefactor.is_constant() and t.prefactor.constant_value() == 1):
        nparts.append("(%s)" % t.prefactor)
    for arg, var in t.numer_poch:
        nparts.append("poch(%s,%s)" % (arg, var))
    for base, var in t.const_powers:
        b = base if isinstance(base, str) else _fs(base)
        nparts.append("pow(%s,%s)" % (b, var))
    dparts = ["poch(%s,%s)" % (arg, var) for arg, var in t.denom_poch]
    num = "*".join(nparts) if nparts else "1"
    if not dparts:
        return num
    return "%s/(%s)" % (num, "*".join(dparts))


def _power_base(base):
    if isinstance(base, str):
        return base
    return Fraction(base)


# ---------------------------------------------------------------------------
# series specifications
# ---------------------------------------------------------------------------

class SeriesSpec:
    """A pFq series at a fixed rational argument (1 throughout the corpus)."""

    __slots__ = ("upper", "lower", "argument")

    def __init__(self, upper: Iterable[LinArg], lower: Iterable[LinArg],
                 argument=1):
        upper = tuple(upper)
        lower = tuple(lower)
        for arg in upper + lower:
            if arg.k_coeff:
                raise TermError("series parameters may not contain k")
        if len(upper) > len(lower) + 1:
            raise TermError(
                "series with %d upper and %d lower parameters diverges "
                "structurally at argument 1" % (len(upper), len(lower)))
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "argument", Fraction(argument))

    def __setattr__(self, *a):
        raise AttributeError("SeriesSpec is immutable")

    def sorted(self) -> "SeriesSpec":
        return SeriesSpec(sorted(self.upper, key=LinArg.sort_key),
                          sorted(self.lower, key=LinArg.sort_key),
                          self.argument)

    def __eq__(self, other):
        if not isinstance(other, SeriesSpec):
            return NotImplemented
        a, b = self.sorted(), other.sorted()
        return (a.upper == b.upper and a.lower == b.lower
                and a.argument == b.argument)

    def __hash__(self):
        s = self.sorted()
        return hash((s.upper, s.lower, s.argument))

    def subs_param(self, name: str, repl: LinArg) -> "SeriesSpec":
        return SeriesSpec([u.subs_param(name, repl) for u in self.upper],
                          [l.subs_param(name, repl) for l in self.lower],
                          self.argument)

    def terminating_order(self) -> Optional[int]:
        """m when some upper parameter is exactly -m (m >= 0), else None."""
        best = None
        for u in self.upper:
            if u.is_nonpositive_integer():
                m = -int(u.const)
                best = m if best is None else min(best, m)
        return best

    def param_names(self) -> list:
        names = set()
        for arg in self.upper + self.lower:
            names.update(arg.params)
        return sorted(names)

    def __str__(self):
        return "pFq([%s],[%s],%s)" % (
            ",".join(str(u) for u in self.upper),
            ",".join(str(l) for l in self.lower),
            _fs(self.argument))

    def __repr__(self):
        return "SeriesSpec(%s)" % self


def term_from_series(spec: SeriesSpec) -> HyperTerm:
    """The k-th term of the series: prod (u)_k / (prod (l)_k * k!) * z^k.

    The factorial is stored as the Pochhammer (1)_k so shift quotients
    stay purely rational; t(0) = 1 by construction.
    """
    numer = [(u, "k") for u in spec.upper]
    denom = [(l, "k") for l in spec.lower] + [(LinArg.num(1), "k")]
    powers = []
    if spec.argument != 1:
        if spec.argument == 0:
            raise TermError("series argument must be nonzero")
        powers.append((spec.argument, "k"))
    return HyperTerm(numer, denom, powers, 1)
