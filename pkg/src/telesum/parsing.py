"""Text grammar for terms, series, rational functions and Gamma quotients.

The grammar is whitespace-insensitive arithmetic over integers and
identifiers with the call forms ``poch(arg, var)``, ``fac(k)``,
``pow(base, var)``, ``Gamma(arg)``, ``pFq([...],[...], z)``, plus ``pi``
and ``sin`` for reflection factors.  ``n`` and ``k`` are reserved shift
variables; every other identifier is a parameter.

Every canonical printer in the package emits strings this parser
round-trips.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .gammaprod import GammaQuotient
from .polys import MultiPoly, RatFunc
from .terms import HyperTerm, LinArg, SeriesSpec

RESERVED_FUNCS = {"poch", "fac", "pow", "Gamma", "pFq", "sin"}


class ParseError(ValueError):
    """Syntax or interpretation error with position information."""

    def __init__(self, message: str, position: int, expected: str = ""):
        self.position = position
        self.expected = expected
        detail = " (expected %s)" % expected if expected else ""
        super().__init__("%s at position %d%s" % (message, position, detail))


_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
                       r"|(?P<op>\*\*|[()\[\],+\-*/^]))")


def tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError("unrecognized character %r" % text[pos:pos + 1],
                             pos)
        if m.group("num"):
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        elif m.group("op"):
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError("syntax error", pos, repr(op))
        return self.next()

    # expression := sum
    def parse_sum(self):
        node = self.parse_product()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.parse_product()
                node = (val, node, rhs)
            else:
                return node

    def parse_product(self):
        node = self.parse_unary()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.parse_unary()
                node = (val, node, rhs)
            else:
                return node

    def parse_unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            inner = self.parse_unary()
            return inner if val == "+" else ("neg", inner)
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.next()
            expo = self.parse_unary()
            return ("^", base, expo)
        return base

    def parse_atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return ("num", Fraction(int(val)))
        if kind == "ident":
            nkind, nval, npos = self.peek()
            if nkind == "op" and nval == "(":
                self.next()
                args = []
                if not self._at_op(")"):
                    args.append(self.parse_argument())
                    while self._at_op(","):
                        self.next()
                        args.append(self.parse_argument())
                self.expect_op(")")
                return ("call", val, args)
            return ("sym", val)
        if kind == "op" and val == "(":
            node = self.parse_sum()
            self.expect_op(")")
            return node
        if kind == "op" and val == "[":
            items = []
            if not self._at_op("]"):
                items.append(self.parse_sum())
                while self._at_op(","):
                    self.next()
                    items.append(self.parse_sum())
            self.expect_op("]")
            return ("list", items)
        raise ParseError("syntax error", pos, "a value")

    def parse_argument(self):
        if self._at_op("["):
            return self._parse_list()
        return self.parse_sum()

    def _parse_list(self):
        self.expect_op("[")
        items = []
        if not self._at_op("]"):
            items.append(self.parse_sum())
            while self._at_op(","):
                self.next()
                items.append(self.parse_sum())
        self.expect_op("]")
        return ("list", items)

    def _at_op(self, op):
        kind, val, _ = self.peek()
        return kind == "op" and val == op

    def finish(self, node):
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos, "end of input")
        return node


def parse_ast(text: str):
    p = _Parser(text)
    return p.finish(p.parse_sum())


# ---------------------------------------------------------------------------
# interpreters
# ---------------------------------------------------------------------------

def _ast_to_ratfunc(node) -> RatFunc:
    kind = node[0]
    if kind == "num":
        return RatFunc.const(node[1])
    if kind == "sym":
        return RatFunc.var(node[1])
    if kind == "neg":
        return -_ast_to_ratfunc(node[1])
    if kind in "+-*/":
        a = _ast_to_ratfunc(node[1])
        b = _ast_to_ratfunc(node[2])
        if kind == "+":
            return a + b
        if kind == "-":
            return a - b
        if kind == "*":
            return a * b
        return a / b
    if kind == "^":
        base = _ast_to_ratfunc(node[1])
        expo = _ast_int(node[2])
        return base ** expo
    if kind == "call":
        raise ParseError("function %s() not allowed in a rational function"
                         % node[1], 0)
    raise ParseError("cannot interpret %r as a rational function" % (node,), 0)


def _ast_int(node) -> int:
    if node[0] == "num" and node[1].denominator == 1:
        return int(node[1])
    if node[0] == "neg":
        return -_ast_int(node[1])
    raise ParseError("exponent must be an integer", 0)


def parse_ratfunc(text: str) -> RatFunc:
    return _ast_to_ratfunc(parse_ast(text))


def parse_linarg(text: str) -> LinArg:
    return _linarg_from_ast(parse_ast(text))


def _linarg_from_ast(node) -> LinArg:
    rf = _ast_to_ratfunc(node)
    if not (rf.den.is_constant() and rf.den.constant_value() == 1):
        raise ParseError("argument must be polynomial: %s" % rf, 0)
    return LinArg.from_poly(rf.num)


# -- factor flattening for terms and Gamma quotients -------------------------

def _flatten_factors(node, sign: int, out: List[Tuple[tuple, int]]):
    """Collect (atom, exponent_sign) pairs from a product/quotient tree."""
    kind = node[0]
    if kind == "*":
        _flatten_factors(node[1], sign, out)
        _flatten_factors(node[2], sign, out)
    elif kind == "/":
        _flatten_factors(node[1], sign, out)
        _flatten_factors(node[2], -sign, out)
    elif kind == "^" and node[2][0] == "num":
        e = _ast_int(node[2])
        rep = abs(e)
        inner_sign = sign if e >= 0 else -sign
        for _ in range(rep):
            _flatten_factors(node[1], inner_sign, out)
        if rep == 0:
            pass
    else:
        out.append((node, sign))


def parse_term(text: str) -> HyperTerm:
    """Parse a product of poch/fac/pow factors times a rational prefactor."""
    node = parse_ast(text)
    factors: List[Tuple[tuple, int]] = []
    _flatten_factors(node, 1, factors)
    numer, denom, powers = [], [], []
    pref = RatFunc.const(1)
    for atom, sign in factors:
        if atom[0] == "call" and atom[1] == "poch":
            if len(atom[2]) != 2:
                raise ParseError("poch() takes two arguments", 0)
            arg = _linarg_from_ast(atom[2][0])
            var = _var_name(atom[2][1])
            (numer if sign > 0 else denom).append((arg, var))
        elif atom[0] == "call" and atom[1] == "fac":
            if len(atom[2]) != 1:
                raise ParseError("fac() takes one argument", 0)
            var = _var_name(atom[2][0])
            (numer if sign > 0 else denom).append((LinArg.num(1), var))
        elif atom[0] == "call" and atom[1] == "pow":
            if len(atom[2]) != 2:
                raise ParseError("pow() takes two arguments", 0)
            base = _power_base_from_ast(atom[2][0])
            var = _var_name(atom[2][1])
            if sign > 0:
                powers.append((base, var))
            else:
                if isinstance(base, str):
                    raise ParseError("cannot invert symbolic power base", 0)
                powers.append((1 / base, var))
        else:
            rf = _ast_to_ratfunc(atom)
            pref = pref * rf if sign > 0 else pref / rf
    return HyperTerm(numer, denom, powers, pref)


def _var_name(node) -> str:
    if node[0] == "sym" and node[1] in ("n", "k"):
        return node[1]
    raise ParseError("shift variable must be n or k", 0)


def _power_base_from_ast(node):
    if node[0] == "sym":
        return node[1]
    if node[0] == "neg":
        inner = _power_base_from_ast(node[1])
        if isinstance(inner, str):
            raise ParseError("negated symbolic base unsupported", 0)
        return -inner
    rf = _ast_to_ratfunc(node)
    if not rf.is_constant():
        raise ParseError("power base must be rational or a parameter", 0)
    return rf.constant_value()


def parse_series(text: str) -> SeriesSpec:
    node = parse_ast(text)
    return _series_from_ast(node)


def _series_from_ast(node) -> SeriesSpec:
    if node[0] != "call" or node[1] != "pFq":
        raise ParseError("expected pFq([...],[...],z)", 0)
    if len(node[2]) != 3:
        raise ParseError("pFq() takes three arguments", 0)
    up_node, low_node, z_node = node[2]
    if up_node[0] != "list" or low_node[0] != "list":
        raise ParseError("pFq parameter groups must be bracketed lists", 0)
    upper = [_linarg_from_ast(x) for x in up_node[1]]
    lower = [_linarg_from_ast(x) for x in low_node[1]]
    z = _ast_to_ratfunc(z_node)
    if not z.is_constant():
        raise ParseError("series argument must be rational", 0)
    return SeriesSpec(upper, lower, z.constant_value())


def parse_expression(text: str) -> Union[HyperTerm, SeriesSpec]:
    """Dispatch: a pFq(...) call is a series, anything else a term."""
    node = parse_ast(text)
    if node[0] == "call" and node[1] == "pFq":
        return _series_from_ast(node)
    return parse_term(text)


def parse_gamma_quotient(text: str) -> GammaQuotient:
    node = parse_ast(text)
    factors: List[Tuple[tuple, int]] = []
    _flatten_factors(node, 1, factors)
    numer, denom = [], []
    pi_count = 0
    sins: List[Tuple[LinArg, int]] = []
    sign_n = False
    pref = RatFunc.const(1)
    for atom, sign in factors:
        if atom[0] == "call" and atom[1] == "Gamma":
            if len(atom[2]) != 1:
                raise ParseError("Gamma() takes one argument", 0)
            arg = _linarg_from_ast(atom[2][0])
            (numer if sign > 0 else denom).append(arg)
        elif atom[0] == "call" and atom[1] == "pow":
            base = _power_base_from_ast(atom[2][0])
            var = _var_name(atom[2][1])
            if base == -1 and var == "n":
                sign_n = not sign_n
            else:
                raise ParseError("only pow(-1,n) allowed in Gamma quotients", 0)
        elif atom[0] == "sym" and atom[1] == "pi":
            pi_count += sign
        elif atom[0] == "call" and atom[1] == "sin":
            arg = _sin_arg(atom[2])
            sins.append((arg, sign))
        else:
            rf = _ast_to_ratfunc(atom)
            pref = pref * rf if sign > 0 else pref / rf
    refl_numer, refl_denom = [], []
    for arg, sign in sins:
        if sign < 0:
            if pi_count <= 0:
                raise ParseError("sin() without matching pi factor", 0)
            pi_count -= 1
            refl_numer.append(arg)
        else:
            if pi_count >= 0:
                raise ParseError("sin() without matching 1/pi factor", 0)
            pi_count += 1
            refl_denom.append(arg)
    if pi_count != 0:
        raise ParseError("unmatched pi factor", 0)
    return GammaQuotient(numer, denom, pref, sign_n, refl_numer, refl_denom)


def _sin_arg(args) -> LinArg:
    if len(args) != 1:
        raise ParseError("sin() takes one argument", 0)
    node = args[0]
    # expect pi*(z)
    if node[0] == "*" and node[1] == ("sym", "pi"):
        return _linarg_from_ast(node[2])
    raise ParseError("reflection factor must look like sin(pi*(z))", 0)
