"""Identity statements and machine-checkable proof traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .asymptotics import Constraint, RE_POSITIVE, NOT_NONPOS_INT, \
    dedupe_constraints
from .gammaprod import GammaQuotient, gamma_simplify
from .parsing import parse_gamma_quotient, parse_linarg, parse_series
from .terms import SeriesSpec


@dataclass(frozen=True)
class ProofStep:
    """One re-checkable derivation step; payload values are canonical strings."""
    kind: str
    payload: Tuple[Tuple[str, str], ...]

    @classmethod
    def make(cls, kind: str, **payload) -> "ProofStep":
        return cls(kind, tuple(sorted(payload.items())))

    def get(self, key: str) -> Optional[str]:
        for k, v in self.payload:
            if k == key:
                return v
        return None

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        for k, v in self.payload:
            d[k] = v
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ProofStep":
        payload = {k: v for k, v in d.items() if k != "kind"}
        return cls.make(d["kind"], **payload)


@dataclass(frozen=True)
class ProofTrace:
    steps: Tuple[ProofStep, ...]

    def to_json(self) -> list:
        return [s.to_json() for s in self.steps]

    @classmethod
    def from_json(cls, items: list) -> "ProofTrace":
        return cls(tuple(ProofStep.from_json(d) for d in items))

    def find(self, kind: str) -> Optional[ProofStep]:
        for s in self.steps:
            if s.kind == kind:
                return s
        return None


def constraint_to_json(c: Constraint) -> dict:
    return {"form": str(c.form), "kind": c.kind, "text": str(c)}


def constraint_from_json(d: dict) -> Constraint:
    return Constraint(parse_linarg(d["form"]), d["kind"])


@dataclass(frozen=True)
class IdentityStatement:
    """sum_i coeff_i * series_i = rhs under the listed constraints."""
    ident_id: str
    lhs: Tuple[Tuple[GammaQuotient, SeriesSpec], ...]
    rhs: GammaQuotient
    constraints: Tuple[Constraint, ...]
    source: str = ""
    trace: Optional[ProofTrace] = None

    def param_names(self) -> List[str]:
        names = set()
        for coeff, spec in self.lhs:
            names.update(spec.param_names())
            for arg in coeff.numer + coeff.denom + coeff.refl_numer \
                    + coeff.refl_denom:
                names.update(arg.params)
            for v in coeff.pref.num.variables + coeff.pref.den.variables:
                if v not in ("n", "k") and coeff.pref.depends_on(v):
                    names.add(v)
        for arg in self.rhs.numer + self.rhs.denom + self.rhs.refl_numer \
                + self.rhs.refl_denom:
            names.update(arg.params)
        for v in self.rhs.pref.num.variables + self.rhs.pref.den.variables:
            if v not in ("n", "k") and self.rhs.pref.depends_on(v):
                names.add(v)
        for c in self.constraints:
            names.update(c.form.params)
        return sorted(names)

    def structurally_equal(self, other: "IdentityStatement") -> bool:
        """Same series multiset, equal coefficients and right side."""
        if gamma_simplify(self.rhs) != gamma_simplify(other.rhs):
            return False
        if len(self.lhs) != len(other.lhs):
            return False
        mine = {spec.sorted(): coeff for coeff, spec in self.lhs}
        theirs = {spec.sorted(): coeff for coeff, spec in other.lhs}
        if set(map(str, mine)) != set(map(str, theirs)):
            return False
        for key, coeff in mine.items():
            if coeff != theirs[key]:
                return False
        return (dedupe_constraints(self.constraints)
                == dedupe_constraints(other.constraints))

    def to_json(self) -> dict:
        d = {
            "id": self.ident_id,
            "source": self.source,
            "lhs": [{"coefficient": str(coeff), "series": str(spec)}
                    for coeff, spec in self.lhs],
            "rhs": str(self.rhs),
            "constraints": [constraint_to_json(c) for c in self.constraints],
        }
        if self.trace is not None:
            d["trace"] = self.trace.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "IdentityStatement":
        lhs = tuple((parse_gamma_quotient(item["coefficient"]),
                     parse_series(item["series"])) for item in d["lhs"])
        constraints = tuple(constraint_from_json(c) for c in d["constraints"])
        trace = ProofTrace.from_json(d["trace"]) if "trace" in d else None
        return cls(d["id"], lhs, parse_gamma_quotient(d["rhs"]),
                   constraints, d.get("source", ""), trace)
