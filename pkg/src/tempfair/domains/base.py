"""Common interface every decision domain implements for one time step."""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterator, Optional, Sequence

import numpy as np

from ..fairness import UtilityVector
from ..milp import LinearModel
from ..milp.branch_bound import Separator


class ConstraintViolation(ValueError):
    """A solution breaks one of the instance's constraints."""

    def __init__(self, constraint: str, detail: str = "", step: int | None = None):
        self.constraint = constraint
        self.detail = detail
        self.step = step
        where = f"step {step}: " if step is not None else ""
        super().__init__(f"{where}constraint {constraint!r} violated{': ' + detail if detail else ''}")


class InfeasibleError(RuntimeError):
    """No feasible solution exists."""


class BackendMismatch(ValueError):
    """The requested solver backend cannot handle this instance/formulation."""


@dataclass(frozen=True)
class Candidate:
    """One enumerated solution with its precomputed quality and utilities."""

    solution: Hashable
    quality: float
    utilities: np.ndarray


@dataclass
class StepIP:
    """Integer-program fragment for one step, before fairness terms are added.

    ``quality`` is already in maximize orientation (costs negated).
    """

    model: LinearModel
    quality: dict[int, float]
    utilities: list[dict[int, float]]
    decode: Callable[[np.ndarray], Any]
    quality_constant: float = 0.0
    separator: Optional[Separator] = None
    separate_fractional: bool = False
    extra: dict = field(default_factory=dict)


class DomainInstance(abc.ABC):
    """A single-step decision problem: candidate space, constraints, quality
    and the per-entity utilities the fairness metrics consume."""

    domain: str = "abstract"
    default_backend: str = "enumerate"

    @property
    @abc.abstractmethod
    def entities(self) -> tuple[str, ...]:
        ...

    @abc.abstractmethod
    def quality(self, solution) -> float:
        """Quality in maximize orientation."""

    @abc.abstractmethod
    def utility_values(self, solution) -> np.ndarray:
        ...

    @abc.abstractmethod
    def check(self, solution) -> None:
        """Raise :class:`ConstraintViolation` if ``solution`` is infeasible."""

    def utilities(self, solution) -> UtilityVector:
        return UtilityVector(self.entities, tuple(self.utility_values(solution)))

    def candidates(self) -> Iterator:
        raise BackendMismatch(f"{self.domain} instances cannot be enumerated")

    def distinct_candidates(self) -> list[Candidate]:
        """Candidates with pairwise distinct (quality, utilities), each
        represented by its first solution in canonical order.

        Every objective in this package depends on a solution only through
        its quality and utilities, so this list is enough to find an optimum
        and the canonical-first tie-break survives the reduction.
        """
        cached = getattr(self, "_distinct_cache", None)
        if cached is not None:
            return cached
        seen: dict[tuple, Candidate] = {}
        for sol in self.candidates():
            u = np.asarray(self.utility_values(sol), dtype=float)
            q = float(self.quality(sol))
            key = (round(q, 12),) + tuple(np.round(u, 12))
            if key not in seen:
                seen[key] = Candidate(sol, q, u)
        out = list(seen.values())
        if not out:
            raise InfeasibleError(f"{self.domain} instance has no feasible solution")
        object.__setattr__(self, "_distinct_cache", out)
        return out

    def exact_search(self, beta: float, metric: str, offsets: np.ndarray):
        """Optional specialized exact search for single-step objectives
        ``quality + beta * canonical F(offsets + utilities)``.

        Returns a solution, or ``None`` when the domain has none (the
        generic candidate enumeration is used instead).
        """
        return None

    def build_ip(self) -> StepIP:
        raise BackendMismatch(f"{self.domain} instances have no integer-program backend")


def as_sequence(x) -> Sequence:
    if isinstance(x, (list, tuple)):
        return x
    return (x,)
