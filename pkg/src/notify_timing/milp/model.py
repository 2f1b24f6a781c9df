"""Plain linear-model carrier shared by the builders, exporters and backends."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = ["BINARY", "INTEGER", "CONTINUOUS", "Variable", "Constraint", "MilpModel"]

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"
_KINDS = (BINARY, INTEGER, CONTINUOUS)
_SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = CONTINUOUS
    lb: float = 0.0
    ub: float = math.inf


@dataclass(frozen=True)
class Constraint:
    """Row ``sum(coeffs[v] * v) sense rhs``."""

    name: str
    coeffs: tuple
    sense: str
    rhs: float


@dataclass
class MilpModel:
    """Minimization model with named variables and rows.

    ``meta`` records what was built (formulation, instance, scenarios) so the
    embedded solver can dispatch to the matching combinatorial search.
    """

    name: str = "model"
    variables: dict = field(default_factory=dict)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    _row_names: set = field(default_factory=set, repr=False)

    def add_var(self, name: str, kind: str = CONTINUOUS, lb: float = 0.0, ub: float = math.inf) -> str:
        if kind not in _KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        if kind == BINARY:
            lb, ub = 0.0, 1.0
        self.variables[name] = Variable(name, kind, lb, ub)
        return name

    def add_constr(self, name: str, coeffs: dict, sense: str, rhs: float) -> None:
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if name in self._row_names:
            raise ValueError(f"duplicate constraint {name!r}")
        for v in coeffs:
            if v not in self.variables:
                raise ValueError(f"constraint {name!r} references undeclared variable {v!r}")
        terms = tuple((v, c) for v, c in coeffs.items() if c != 0)
        self._row_names.add(name)
        self.constraints.append(Constraint(name, terms, sense, rhs))

    def set_objective(self, coeffs: dict) -> None:
        for v in coeffs:
            if v not in self.variables:
                raise ValueError(f"objective references undeclared variable {v!r}")
        self.objective = {v: c for v, c in coeffs.items() if c != 0}

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constrs(self) -> int:
        return len(self.constraints)

    def vars_of_kind(self, kind: str) -> list[str]:
        return [v.name for v in self.variables.values() if v.kind == kind]

    def evaluate(self, values: dict) -> float:
        """Objective at ``values`` (missing variables count as 0)."""
        return sum(c * values.get(v, 0.0) for v, c in self.objective.items())

    def violations(self, values: dict, tol: float = 1e-6) -> list[str]:
        """Names of rows and bounds that ``values`` breaks."""
        bad = []
        for con in self.constraints:
            lhs = sum(c * values.get(v, 0.0) for v, c in con.coeffs)
            if con.sense == "<=" and lhs > con.rhs + tol:
                bad.append(con.name)
            elif con.sense == ">=" and lhs < con.rhs - tol:
                bad.append(con.name)
            elif con.sense == "=" and abs(lhs - con.rhs) > tol:
                bad.append(con.name)
        for var in self.variables.values():
            x = values.get(var.name, 0.0)
            if x < var.lb - tol or x > var.ub + tol:
                bad.append(f"bound:{var.name}")
            if var.kind != CONTINUOUS and abs(x - round(x)) > tol:
                bad.append(f"integrality:{var.name}")
        return bad
