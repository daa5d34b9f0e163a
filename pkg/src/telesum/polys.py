"""Exact multivariate polynomials and rational functions over the rationals.

Everything in this module is immutable and pure.  Polynomials live in
``Q[params..., n, k]`` with a fixed lexicographic monomial order: parameter
symbols sorted alphabetically, then ``n``, then ``k``.  Rational functions
are kept gcd-reduced with a lex-monic denominator, so structural equality
is mathematical equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

#: Coefficient domain.  ``fractions.Fraction`` already maintains the
#: invariants we need (reduced, positive denominator, canonical zero).
Rational = Fraction


def _var_key(name: str):
    # parameters first (alphabetically), then n, then k
    if name == "n":
        return (1, "")
    if name == "k":
        return (2, "")
    return (0, name)


def merge_variables(u: Sequence[str], v: Sequence[str]) -> tuple:
    return tuple(sorted(set(u) | set(v), key=_var_key))


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    num = math.gcd(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


class MultiPoly:
    """Sparse multivariate polynomial with Fraction coefficients."""

    __slots__ = ("variables", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: dict):
        self.variables = tuple(variables)
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self._hash = None

    # -- construction -------------------------------------------------

    @classmethod
    def const(cls, value, variables: Sequence[str] = ()) -> "MultiPoly":
        value = Fraction(value)
        variables = tuple(variables)
        if value == 0:
            return cls(variables, {})
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def var(cls, name: str) -> "MultiPoly":
        return cls((name,), {(1,): Fraction(1)})

    # -- bookkeeping ---------------------------------------------------

    def embed(self, variables: Sequence[str]) -> "MultiPoly":
        """Reinterpret over a superset of variables."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        idx = {v: i for i, v in enumerate(variables)}
        pos = [idx[v] for v in self.variables]
        zero = [0] * len(variables)
        terms = {}
        for e, c in self.terms.items():
            exp = zero[:]
            for p, ei in zip(pos, e):
                exp[p] = ei
            terms[tuple(exp)] = c
        return MultiPoly(variables, terms)

    def _unify(self, other: "MultiPoly"):
        if self.variables == other.variables:
            return self, other
        vs = merge_variables(self.variables, other.variables)
        return self.embed(vs), other.embed(vs)

    def compress(self) -> "MultiPoly":
        """Drop variables that do not occur."""
        if not self.terms:
            return MultiPoly((), {})
        used = [i for i in range(len(self.variables))
                if any(e[i] for e in self.terms)]
        if len(used) == len(self.variables):
            return self
        vs = tuple(self.variables[i] for i in used)
        return MultiPoly(vs, {tuple(e[i] for i in used): c
                              for e, c in self.terms.items()})

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant: %s" % self)
        return next(iter(self.terms.values()))

    def depends_on(self, name: str) -> bool:
        if name not in self.variables:
            return False
        i = self.variables.index(name)
        return any(e[i] for e in self.terms)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.variables)
        elif not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._unify(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            s = terms.get(e, Fraction(0)) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return MultiPoly(a.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.variables)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if q == 0:
                return MultiPoly(self.variables, {})
            return MultiPoly(self.variables,
                             {e: c * q for e, c in self.terms.items()})
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._unify(other)
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = terms.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return MultiPoly(a.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if m < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(1, self.variables)
        base = self
        while m:
            if m & 1:
                result = result * base
            base = base * base if m > 1 else base
            m >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.variables)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = self._unify(other)
        return a.terms == b.terms

    def __hash__(self):
        if self._hash is None:
            c = self.compress()
            self._hash = hash((c.variables, frozenset(c.terms.items())))
        return self._hash

    # -- structure -----------------------------------------------------

    def degree(self, name: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if name not in self.variables:
            return 0
        i = self.variables.index(name)
        return max(e[i] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def coeff_of(self, name: str, power: int) -> "MultiPoly":
        """Coefficient of ``name**power`` (a polynomial in the other vars)."""
        if name not in self.variables:
            if power == 0:
                return self
            return MultiPoly(self.variables, {})
        i = self.variables.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i] == power:
                e2 = e[:i] + (0,) + e[i + 1:]
                terms[e2] = c
        return MultiPoly(self.variables, terms)

    def coeff_list(self, name: str) -> list:
        """Ascending coefficients in one variable."""
        d = self.degree(name)
        if d < 0:
            return []
        return [self.coeff_of(name, i) for i in range(d + 1)]

    def leading_term(self):
        """(exponent, coefficient) of the lex-leading monomial."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms)
        return e, self.terms[e]

    def leading_coeff(self) -> Fraction:
        return self.leading_term()[1]

    def leading_coeff_in(self, name: str) -> "MultiPoly":
        return self.coeff_of(name, self.degree(name))

    # -- substitution ----------------------------------------------------

    def subs(self, name: str, value) -> "MultiPoly":
        """Substitute a polynomial or rational constant for a variable."""
        if name not in self.variables:
            return self
        if isinstance(value, (int, Fraction)):
            value = MultiPoly.const(value, ())
        i = self.variables.index(name)
        dmax = self.degree(name)
        powers = [MultiPoly.const(1, value.variables)]
        for _ in range(max(dmax, 0)):
            powers.append(powers[-1] * value)
        result = MultiPoly((), {})
        for d in range(dmax + 1):
            cd = self.coeff_of(name, d)
            if cd.is_zero():
                continue
            result = result + cd * powers[d]
        return result.compress()

    def shift(self, name: str, offset) -> "MultiPoly":
        """Substitute ``name -> name + offset``."""
        if name not in self.variables or not self.depends_on(name):
            return self
        repl = MultiPoly.var(name) + MultiPoly.const(offset, (name,))
        return self.subs(name, repl)

    def eval_all(self, assignment: dict) -> Fraction:
        """Evaluate with every variable assigned a Fraction."""
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for name, ei in zip(self.variables, e):
                if ei:
                    v *= Fraction(assignment[name]) ** ei
            total += v
        return total

    # -- division ----------------------------------------------------------

    def exact_div(self, other: "MultiPoly") -> Optional["MultiPoly"]:
        """Exact quotient, or None when the division is not exact."""
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if q == 0:
                raise ZeroDivisionError("polynomial division by zero")
            return self * (1 / q)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return MultiPoly(self.variables, {})
        a, b = self._unify(other)
        if b.is_constant():
            return a * (1 / b.constant_value())
        eb, cb = b.leading_term()
        quot: dict = {}
        rem = a
        while not rem.is_zero():
            er, cr = rem.leading_term()
            de = tuple(x - y for x, y in zip(er, eb))
            if any(d < 0 for d in de):
                return None
            q = cr / cb
            quot[de] = quot.get(de, Fraction(0)) + q
            rem = rem - MultiPoly(a.variables, {de: q}) * b
        return MultiPoly(a.variables, {e: c for e, c in quot.items() if c != 0})

    def divides(self, other: "MultiPoly") -> bool:
        return other.exact_div(self) is not None

    # -- normalization ------------------------------------------------------

    def rational_content(self) -> Fraction:
        """Positive rational c with self/c integer-primitive."""
        if not self.terms:
            return Fraction(1)
        g = Fraction(0)
        for c in self.terms.values():
            g = _frac_gcd(g, c)
            if g == 1:
                break
        return g

    def canonical(self) -> "MultiPoly":
        """Integer-primitive with positive lex-leading coefficient."""
        if not self.terms:
            return self.compress()
        c = self.rational_content()
        if self.leading_coeff() < 0:
            c = -c
        return (self * (1 / c)).compress()

    # -- printing -------------------------------------------------------

    def __repr__(self):
        return "MultiPoly(%s)" % format_poly(self)

    def __str__(self):
        return format_poly(self)


def format_poly(p: MultiPoly) -> str:
    """Canonical string: monomials in descending lex order."""
    if not p.terms:
        return "0"
    pieces = []
    for e in sorted(p.terms, reverse=True):
        c = p.terms[e]
        factors = []
        for name, ei in zip(p.variables, e):
            if ei == 1:
                factors.append(name)
            elif ei > 1:
                factors.append("%s^%d" % (name, ei))
        if not factors:
            body = _frac_str(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_frac_str(abs(c))] + factors)
        pieces.append(("- " if c < 0 else "+ ") + body)
    out = " ".join(pieces)
    if out.startswith("+ "):
        out = out[2:]
    elif out.startswith("- "):
        out = "-" + out[2:]
    return out


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


# ---------------------------------------------------------------------------
# gcd machinery (primitive PRS)
# ---------------------------------------------------------------------------

def _main_var(p: MultiPoly, q: MultiPoly) -> Optional[str]:
    """Last variable (in the canonical order) that actually occurs."""
    for name in reversed(merge_variables(p.variables, q.variables)):
        if p.depends_on(name) or q.depends_on(name):
            return name
    return None


def _pseudo_rem(f: list, g: list) -> list:
    """Remainder of lc(g)^m * f modulo g, on ascending coefficient lists.

    The exact power m is irrelevant here because callers strip content
    from every remainder anyway.
    """
    df, dg = len(f) - 1, len(g) - 1
    if df < dg:
        return list(f)
    lcg = g[dg]
    r = list(f)
    for i in range(df, dg - 1, -1):
        t = r[i]
        if t.is_zero():
            continue
        r = [c * lcg for c in r]
        for j in range(dg + 1):
            r[i - dg + j] = r[i - dg + j] - t * g[j]
    while r and r[-1].is_zero():
        r.pop()
    return r[:dg] if len(r) > dg else r


def _from_coeff_list(coeffs: list, name: str) -> MultiPoly:
    result = MultiPoly((), {})
    x = MultiPoly.var(name)
    for d, c in enumerate(coeffs):
        if not c.is_zero():
            result = result + c * x ** d
    return result


def _content_in(p: MultiPoly, name: str) -> MultiPoly:
    """gcd of the coefficients of p seen as univariate in name."""
    coeffs = [c for c in p.coeff_list(name) if not c.is_zero()]
    g = MultiPoly((), {})
    for c in coeffs:
        g = poly_gcd(g, c)
        if g.is_constant() and not g.is_zero():
            break
    return g


def poly_gcd(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Greatest common divisor, canonically normalized; gcd(0, 0) = 0.

    Uses a primitive polynomial remainder sequence in the last occurring
    variable, with contents handled recursively over the remaining ones.
    """
    if p.is_zero() and q.is_zero():
        return MultiPoly((), {})
    if p.is_zero():
        return q.canonical()
    if q.is_zero():
        return p.canonical()
    if p.is_constant() or q.is_constant():
        return MultiPoly.const(1)
    var = _main_var(p, q)
    if var is None:
        return MultiPoly.const(1)
    if not p.depends_on(var) or not q.depends_on(var):
        # one of them is "constant" w.r.t. the main variable
        if p.depends_on(var):
            return poly_gcd(_content_in(p, var), q)
        return poly_gcd(p, _content_in(q, var))

    cont_p = _content_in(p, var)
    cont_q = _content_in(q, var)
    cont = poly_gcd(cont_p, cont_q)
    a = p.exact_div(cont_p)
    b = q.exact_div(cont_q)
    fa = a.coeff_list(var)
    fb = b.coeff_list(var)
    if len(fa) < len(fb):
        fa, fb = fb, fa
    while fb:
        r = _pseudo_rem(fa, fb)
        if r:
            rp = _from_coeff_list(r, var)
            rp = rp.exact_div(_content_in(rp, var))
            r = rp.coeff_list(var)
        fa, fb = fb, r
    g = _from_coeff_list(fa, var)
    gc = _content_in(g, var)
    g = g.exact_div(gc)
    return (cont * g).canonical()


def poly_lcm(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    if p.is_zero() or q.is_zero():
        return MultiPoly((), {})
    g = poly_gcd(p, q)
    return (p * q).exact_div(g).canonical()


# ---------------------------------------------------------------------------
# resultants and dispersion
# ---------------------------------------------------------------------------

def resultant(p: MultiPoly, q: MultiPoly, name: str) -> MultiPoly:
    """Resultant w.r.t. one variable, by fraction-free Sylvester elimination."""
    fp = p.coeff_list(name)
    fq = q.coeff_list(name)
    m, n = len(fp) - 1, len(fq) - 1
    if m < 0 or n < 0:
        return MultiPoly((), {})
    if m == 0 and n == 0:
        return MultiPoly.const(1)
    if m == 0:
        return fp[0] ** n
    if n == 0:
        return fq[0] ** m
    size = m + n
    rows = []
    desc_p = list(reversed(fp))
    desc_q = list(reversed(fq))
    for i in range(n):
        row = [MultiPoly((), {})] * size
        for j, c in enumerate(desc_p):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [MultiPoly((), {})] * size
        for j, c in enumerate(desc_q):
            row[i + j] = c
        rows.append(row)
    # Bareiss fraction-free determinant
    sign = 1
    prev = MultiPoly.const(1)
    for i in range(size - 1):
        piv = None
        for r in range(i, size):
            if not rows[r][i].is_zero():
                piv = r
                break
        if piv is None:
            return MultiPoly((), {})
        if piv != i:
            rows[i], rows[piv] = rows[piv], rows[i]
            sign = -sign
        for r in range(i + 1, size):
            for c in range(i + 1, size):
                num = rows[r][c] * rows[i][i] - rows[r][i] * rows[i][c]
                d = num.exact_div(prev)
                assert d is not None, "Bareiss division must be exact"
                rows[r][c] = d
            rows[r][i] = MultiPoly((), {})
        prev = rows[i][i]
    det = rows[size - 1][size - 1]
    return (det if sign > 0 else -det).compress()


def _int_divisors(m: int) -> list:
    m = abs(m)
    out = set()
    d = 1
    while d * d <= m:
        if m % d == 0:
            out.add(d)
            out.add(m // d)
        d += 1
    return sorted(out)


def integer_roots(coeffs: list) -> set:
    """Integer roots of a univariate polynomial with Fraction coefficients."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if not coeffs:
        return set()
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    roots = set()
    low = 0
    while low < len(ints) and ints[low] == 0:
        low += 1
    if low > 0:
        roots.add(0)
        ints = ints[low:]
    if not ints:
        return roots
    g = 0
    for c in ints:
        g = math.gcd(g, c)
    ints = [c // g for c in ints]
    a0 = ints[0]
    if a0 == 0:
        return roots
    for d in _int_divisors(a0):
        for cand in (d, -d):
            v = 0
            for c in reversed(ints):
                v = v * cand + c
            if v == 0:
                roots.add(cand)
    return roots


def dispersion(p: MultiPoly, q: MultiPoly, name: str) -> set:
    """All integers j >= 0 with deg gcd(p(x), q(x + j)) > 0 in x = name.

    Candidates come from integer roots of the resultant in ``name`` (seen
    as a polynomial in the shift), each confirmed by an actual gcd.
    """
    if p.degree(name) <= 0 or q.degree(name) <= 0:
        return set()
    shift_sym = "_j"
    assert shift_sym not in p.variables and shift_sym not in q.variables
    qs = q.subs(name, MultiPoly.var(name) + MultiPoly.var(shift_sym))
    res = resultant(p.embed(merge_variables(p.variables, qs.variables)),
                    qs, name)
    if res.is_zero():
        # common factor for generic shift cannot happen for nonzero inputs
        return set()
    # group by the monomials in everything except the shift symbol
    groups: dict = {}
    if shift_sym in res.variables:
        si = res.variables.index(shift_sym)
    else:
        si = None
    for e, c in res.terms.items():
        if si is None:
            key, je = e, 0
        else:
            key = e[:si] + e[si + 1:]
            je = e[si]
        groups.setdefault(key, {})[je] = c
    candidates = None
    for g in groups.values():
        deg = max(g)
        coeffs = [g.get(i, Fraction(0)) for i in range(deg + 1)]
        roots = integer_roots(coeffs)
        candidates = roots if candidates is None else (candidates & roots)
        if not candidates:
            return set()
    result = set()
    for j in sorted(c for c in candidates if c >= 0):
        if poly_gcd(p, q.shift(name, j)).degree(name) > 0:
            result.add(j)
    return result


def dispersion_brute(p: MultiPoly, q: MultiPoly, name: str, bound: int) -> set:
    """Reference implementation scanning j in 0..bound."""
    out = set()
    for j in range(bound + 1):
        if poly_gcd(p, q.shift(name, j)).degree(name) > 0:
            out.add(j)
    return out


# ---------------------------------------------------------------------------
# square roots and factoring helpers
# ---------------------------------------------------------------------------

def _frac_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def poly_sqrt(p: MultiPoly) -> Optional[MultiPoly]:
    """Exact square root of a polynomial, or None."""
    if p.is_zero():
        return MultiPoly((), {})
    if p.is_constant():
        r = _frac_sqrt(p.constant_value())
        return None if r is None else MultiPoly.const(r)
    var = None
    for name in reversed(p.variables):
        if p.depends_on(name):
            var = name
            break
    coeffs = p.coeff_list(var)
    d = len(coeffs) - 1
    if d % 2:
        return None
    m = d // 2
    top = poly_sqrt(coeffs[d])
    if top is None or top.is_zero():
        # also try factoring out -1 at the caller's discretion
        return None
    s = [None] * (m + 1)
    s[m] = top
    two_top = top * 2
    for i in range(1, m + 1):
        acc = coeffs[d - i]
        for j in range(1, i):
            if m - j >= 0 and m - i + j >= 0:
                acc = acc - s[m - j] * s[m - i + j]
        cand = acc.exact_div(two_top)
        if cand is None:
            return None
        s[m - i] = cand
    x = MultiPoly.var(var)
    root = MultiPoly((), {})
    for i, c in enumerate(s):
        root = root + c * x ** i
    if (root * root) == p:
        return root
    return None


def linear_factors_in(p: MultiPoly, name: str):
    """Split p into monic linear factors ``name + s`` over Q[params].

    Returns ``(leading, [s_1, ..., s_d])`` with
    ``p = leading * prod(name + s_i)``, where ``leading`` is free of
    ``name`` and each ``s_i`` is a polynomial in the other variables,
    or None when such a factorization (degree <= 2 per step) fails.
    """
    d = p.degree(name)
    if d < 0:
        return None
    if d == 0:
        return p, []
    lead = p.coeff_of(name, d)
    if not lead.is_constant():
        # try to pull the leading coefficient out of every term
        monic = p.exact_div(lead)
        if monic is None:
            return None
        res = linear_factors_in(monic, name)
        if res is None:
            return None
        inner_lead, roots = res
        return (lead * inner_lead), roots
    if d == 1:
        b = p.coeff_of(name, 1)
        c = p.coeff_of(name, 0)
        s = c.exact_div(b)
        if s is None:
            return None
        return b, [s.compress()]
    if d == 2:
        a2 = p.coeff_of(name, 2)
        b = p.coeff_of(name, 1)
        c = p.coeff_of(name, 0)
        disc = b * b - 4 * a2 * c
        root = poly_sqrt(disc)
        if root is None:
            return None
        twoa = a2 * 2
        s1 = (b + root).exact_div(twoa)
        s2 = (b - root).exact_div(twoa)
        if s1 is None or s2 is None:
            return None
        return a2, [s1.compress(), s2.compress()]
    # higher degree: peel off rational roots of the constant-coefficient
    # pattern p = (name + s) * rest only when s is constant
    for cand in _constant_root_candidates(p, name):
        shifted = p.subs(name, MultiPoly.var(name) - MultiPoly.const(cand, ()))
        if shifted.coeff_of(name, 0).is_zero():
            quot = p.exact_div(_from_coeff_list(
                [MultiPoly.const(cand), MultiPoly.const(1)], name))
            if quot is not None:
                res = linear_factors_in(quot, name)
                if res is not None:
                    lead2, roots = res
                    return lead2, roots + [MultiPoly.const(cand)]
    return None


def _constant_root_candidates(p: MultiPoly, name: str):
    c0 = p.coeff_of(name, 0)
    if not c0.is_constant():
        return []
    v = c0.constant_value()
    if v == 0:
        return [Fraction(0)]
    cands = []
    for d in _int_divisors(v.numerator if v.numerator else 1):
        cands.extend([Fraction(d), Fraction(-d)])
    return cands


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class RatFunc:
    """Reduced rational function with a lex-monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce: bool = True):
        if isinstance(num, (int, Fraction)):
            num = MultiPoly.const(num)
        if den is None:
            den = MultiPoly.const(1)
        elif isinstance(den, (int, Fraction)):
            den = MultiPoly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            num = MultiPoly((), {})
            den = MultiPoly.const(1)
        elif reduce:
            g = poly_gcd(num, den)
            if not (g.is_constant() and g.constant_value() == 1):
                num = num.exact_div(g)
                den = den.exact_div(g)
        lc = den.leading_coeff() if not den.is_zero() else Fraction(1)
        if lc != 1 and not num.is_zero():
            num = num * (1 / lc)
            den = den * (1 / lc)
        elif lc != 1:
            den = den * (1 / lc)
        object.__setattr__(self, "num", num.compress())
        object.__setattr__(self, "den", den.compress())

    def __setattr__(self, *a):
        raise AttributeError("RatFunc is immutable")

    # -- helpers -------------------------------------------------------

    @classmethod
    def const(cls, value) -> "RatFunc":
        return cls(MultiPoly.const(value))

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls(MultiPoly.var(name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def depends_on(self, name: str) -> bool:
        return self.num.depends_on(name) or self.den.depends_on(name)

    # -- arithmetic ------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, MultiPoly):
            return RatFunc(x)
        if isinstance(x, (int, Fraction)):
            return RatFunc.const(x)
        raise TypeError("cannot coerce %r" % (x,))

    def __add__(self, other):
        o = self._coerce(other)
        if self.is_zero():
            return o
        if o.is_zero():
            return self
        g = poly_gcd(self.den, o.den)
        da = self.den.exact_div(g)
        db = o.den.exact_div(g)
        num = self.num * db + o.num * da
        den = da * o.den
        return RatFunc(num, den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return RatFunc.const(0)
        g1 = poly_gcd(self.num, o.den)
        g2 = poly_gcd(o.num, self.den)
        n1 = self.num.exact_div(g1)
        d2 = o.den.exact_div(g1)
        n2 = o.num.exact_div(g2)
        d1 = self.den.exact_div(g2)
        return RatFunc(n1 * n2, d1 * d2, reduce=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return self * RatFunc(o.den, o.num, reduce=False)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, m: int):
        if m == 0:
            return RatFunc.const(1)
        if m < 0:
            return RatFunc.const(1) / (self ** (-m))
        out = self
        for _ in range(m - 1):
            out = out * self
        return out

    def inverse(self) -> "RatFunc":
        return RatFunc.const(1) / self

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    # -- substitution ----------------------------------------------------

    def subs(self, name: str, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            num = _poly_subs_rat(self.num, name, value)
            den = _poly_subs_rat(self.den, name, value)
            return num / den
        return RatFunc(self.num.subs(name, value), self.den.subs(name, value))

    def shift(self, name: str, offset) -> "RatFunc":
        return RatFunc(self.num.shift(name, offset),
                       self.den.shift(name, offset), reduce=False)

    def eval_all(self, assignment: dict) -> Fraction:
        d = self.den.eval_all(assignment)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at %r" % (assignment,))
        return self.num.eval_all(assignment) / d

    def __repr__(self):
        return "RatFunc(%s)" % format_ratfunc(self)

    def __str__(self):
        return format_ratfunc(self)


def _poly_subs_rat(p: MultiPoly, name: str, value: RatFunc) -> RatFunc:
    if name not in p.variables or not p.depends_on(name):
        return RatFunc(p)
    d = p.degree(name)
    out = RatFunc.const(0)
    power = RatFunc.const(1)
    for i in range(d + 1):
        c = p.coeff_of(name, i)
        if not c.is_zero():
            out = out + RatFunc(c) * power
        if i < d:
            power = power * value
    return out


def format_ratfunc(r: RatFunc) -> str:
    if r.den.is_constant() and r.den.constant_value() == 1:
        return format_poly(r.num)
    return "(%s)/(%s)" % (format_poly(r.num), format_poly(r.den))


# ---------------------------------------------------------------------------
# exact linear solving
# ---------------------------------------------------------------------------

def solve_linear(matrix: Sequence[Sequence[RatFunc]],
                 rhs: Sequence[RatFunc]) -> Optional[list]:
    """Exact solution of ``matrix @ x = rhs`` over the rational-function field.

    Fraction-free elimination after clearing denominators row by row.
    Inconsistent systems return None; underdetermined ones get their free
    unknowns set to zero (determinism matters more than generality here).
    """
    m = len(matrix)
    if m != len(rhs):
        raise ValueError("matrix/rhs size mismatch")
    ncols = len(matrix[0]) if m else 0
    rows = []
    for i in range(m):
        entries = [RatFunc._coerce(e) for e in matrix[i]] + [RatFunc._coerce(rhs[i])]
        den = MultiPoly.const(1)
        for e in entries:
            den = poly_lcm(den, e.den)
        row = []
        for e in entries:
            row.append(e.num * den.exact_div(e.den))
        rows.append(_strip_row(row))

    pivots = []
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, m):
            if not rows[i][col].is_zero():
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        for i in range(m):
            if i == r or rows[i][col].is_zero():
                continue
            f = rows[i][col]
            rows[i] = _strip_row([rows[i][j] * p - rows[r][j] * f
                                  for j in range(ncols + 1)])
        pivots.append((r, col))
        r += 1
    for i in range(r, m):
        if all(rows[i][j].is_zero() for j in range(ncols)) \
                and not rows[i][ncols].is_zero():
            return None
    solution = [RatFunc.const(0)] * ncols
    for (ri, col) in pivots:
        solution[col] = RatFunc(rows[ri][ncols], rows[ri][col])
    return solution


def _strip_row(row: list) -> list:
    g = MultiPoly((), {})
    for e in row:
        g = poly_gcd(g, e)
        if g.is_constant() and not g.is_zero():
            break
    if g.is_zero() or (g.is_constant() and g.constant_value() == 1):
        return row
    return [e.exact_div(g) for e in row]
