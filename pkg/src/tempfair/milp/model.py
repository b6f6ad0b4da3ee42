"""Linear model container shared by the simplex and branch-and-bound code."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

INF = math.inf


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NODE_LIMIT = "NodeLimit"


class NumericalError(RuntimeError):
    """The simplex could not produce a solution that passes the feasibility check."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = INF
    integer: bool = False


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str = ""

    def key(self):
        return (tuple(sorted(self.coeffs)), self.sense, round(self.rhs, 12))

    def activity(self, x) -> float:
        return math.fsum(c * x[j] for j, c in self.coeffs)

    def violation(self, x) -> float:
        lhs = self.activity(x)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


_SENSES = {"<=": "<=", "=<": "<=", "le": "<=", ">=": ">=", "=>": ">=", "ge": ">=",
           "=": "=", "==": "=", "eq": "="}


def _normalize_coeffs(coeffs) -> tuple[tuple[int, float], ...]:
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    merged: dict[int, float] = {}
    for j, c in items:
        merged[int(j)] = merged.get(int(j), 0.0) + float(c)
    return tuple((j, c) for j, c in sorted(merged.items()) if c != 0.0)


class LinearModel:
    """Variables with bounds and integrality, sparse rows, linear objective.

    Rows and the objective reference variables by the integer index returned
    from :meth:`add_var`.
    """

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant = 0.0
        self.sense = "max"
        self._index: dict[str, int] = {}

    # -- construction -------------------------------------------------------
    def add_var(self, name: str | None = None, lb: float = 0.0, ub: float = INF,
                integer: bool = False) -> int:
        name = name or f"x{len(self.variables)}"
        if name in self._index:
            raise ValueError(f"duplicate variable name {name!r}")
        lb, ub = float(lb), float(ub)
        if integer and not (math.isfinite(lb) and math.isfinite(ub)):
            raise ValueError(f"integer variable {name!r} needs finite bounds")
        if lb > ub:
            raise ValueError(f"variable {name!r} has lb > ub")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, lb, ub, bool(integer)))
        return len(self.variables) - 1

    def add_binary(self, name: str | None = None) -> int:
        return self.add_var(name, 0.0, 1.0, integer=True)

    def add_constraint(self, coeffs, sense: str, rhs: float, name: str = "") -> int:
        return self.add(Constraint(_normalize_coeffs(coeffs), self._sense(sense),
                                   float(rhs), name))

    def add(self, constraint: Constraint) -> int:
        n = len(self.variables)
        for j, _ in constraint.coeffs:
            if not 0 <= j < n:
                raise ValueError(f"constraint references undeclared variable {j}")
        self.constraints.append(constraint)
        return len(self.constraints) - 1

    def set_objective(self, coeffs, sense: str = "max", constant: float = 0.0):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.objective = dict(_normalize_coeffs(coeffs))
        self.sense = sense
        self.objective_constant = float(constant)

    @staticmethod
    def _sense(sense: str) -> str:
        try:
            return _SENSES[sense]
        except KeyError:
            raise ValueError(f"unknown constraint sense {sense!r}") from None

    def copy(self) -> "LinearModel":
        other = LinearModel(self.name)
        other.variables = list(self.variables)
        other.constraints = list(self.constraints)
        other.objective = dict(self.objective)
        other.objective_constant = self.objective_constant
        other.sense = self.sense
        other._index = dict(self._index)
        return other

    # -- queries --------------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        return self._index[name]

    def integer_indices(self) -> np.ndarray:
        return np.array([j for j, v in enumerate(self.variables) if v.integer], dtype=int)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for j, v in self.objective.items():
            c[j] = v
        return c

    def evaluate(self, x) -> float:
        return self.objective_constant + math.fsum(c * x[j] for j, c in self.objective.items())

    def max_violation(self, x, lb=None, ub=None) -> float:
        if lb is None or ub is None:
            lb, ub = self.bounds()
        x = np.asarray(x, dtype=float)
        worst = float(max(0.0, np.max(lb - x, initial=0.0), np.max(x - ub, initial=0.0)))
        for con in self.constraints:
            worst = max(worst, con.violation(x) / max(1.0, abs(con.rhs)))
        return worst

    def dense_rows(self, constraints: Iterable[Constraint] | None = None):
        rows = list(self.constraints if constraints is None else constraints)
        A = np.zeros((len(rows), self.n_vars))
        b = np.zeros(len(rows))
        senses = []
        for i, con in enumerate(rows):
            for j, c in con.coeffs:
                A[i, j] += c
            b[i] = con.rhs
            senses.append(con.sense)
        return A, b, senses

    # -- LP file format ----------------------------------------------------------
    def to_lp(self) -> str:
        """Render in the CPLEX LP text format, one constraint per line."""
        names = [_lp_name(v.name) for v in self.variables]

        def expr(coeffs) -> str:
            parts = []
            for j, c in coeffs:
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {abs(c):.17g} {names[j]}")
            if not parts:
                return "0 " + names[0]
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {self.name}", "Maximize" if self.sense == "max" else "Minimize"]
        obj = sorted(self.objective.items())
        lines.append(" obj: " + expr(obj))
        if self.objective_constant:
            lines[-1] += f" + {self.objective_constant:.17g} constant_one"
        lines.append("Subject To")
        for i, con in enumerate(self.constraints):
            label = _lp_name(con.name) if con.name else f"c{i}"
            op = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
            lines.append(f" {label}: {expr(con.coeffs)} {op} {con.rhs:.17g}")
        lines.append("Bounds")
        for n, v in zip(names, self.variables):
            lo = "-inf" if v.lb == -INF else f"{v.lb:.17g}"
            hi = "+inf" if v.ub == INF else f"{v.ub:.17g}"
            lines.append(f" {lo} <= {n} <= {hi}")
        if self.objective_constant:
            lines.append(" constant_one = 1")
        ints = [n for n, v in zip(names, self.variables) if v.integer]
        if ints:
            lines.append("General")
            lines.extend(f" {n}" for n in ints)
        lines.append("End")
        return "\n".join(lines) + "\n"


def _lp_name(name: str) -> str:
    out = "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in name)
    return out if out and not out[0].isdigit() else "v_" + out


@dataclass
class SolveResult:
    status: Status
    x: np.ndarray | None = None
    objective: float = math.nan
    node_count: int = 0
    lp_count: int = 0
    iterations: int = 0
    cuts_added: int = 0
    bound: float = math.nan
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def value(self, j: int) -> float:
        if self.x is None:
            raise ValueError(f"no assignment available (status {self.status.value})")
        return float(self.x[j])
