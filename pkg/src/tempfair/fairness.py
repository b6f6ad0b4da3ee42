"""Fairness metrics over per-entity utility vectors.

Every metric comes in a plain form, taking one :class:`UtilityVector`, and a
temporal form taking a history, a plan of one or more current/future steps
and a :class:`DiscountSpec`.  The temporal form is always the plain metric
applied to :func:`discounted_totals`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "UtilityVector",
    "History",
    "DiscountSpec",
    "MetricKind",
    "Orientation",
    "StructuralError",
    "discounted_totals",
    "rmm",
    "rmm_temporal",
    "rmm_balanced_trajectory",
    "qmmg",
    "qmmg_temporal",
    "maximin_ratio",
    "maximin_ratio_temporal",
    "max_min_gap",
    "max_min_gap_temporal",
    "minimax_cost",
    "minimax_cost_temporal",
    "evaluate",
    "evaluate_temporal",
]


class StructuralError(ValueError):
    """Utility vectors in one computation disagree on their entity list."""


@dataclass(frozen=True)
class UtilityVector:
    """Nonnegative utilities (loads, distances, costs...) of one solution.

    ``values`` is stored as a tuple of floats so instances are hashable and
    immutable.
    """

    entities: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        entities = tuple(str(e) for e in self.entities)
        values = tuple(float(v) for v in self.values)
        if not entities:
            raise ValueError("a utility vector needs at least one entity")
        if len(entities) != len(values):
            raise ValueError(
                f"{len(entities)} entities but {len(values)} values")
        if len(set(entities)) != len(entities):
            raise ValueError("duplicate entity identifiers")
        for e, v in zip(entities, values):
            if not v >= 0.0 or math.isinf(v):
                raise ValueError(f"utility of {e!r} must be finite and >= 0, got {v}")
        object.__setattr__(self, "entities", entities)
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, values: Iterable[float], entities: Iterable[str] | None = None):
        values = tuple(values)
        if entities is None:
            entities = tuple(f"e{i + 1}" for i in range(len(values)))
        return cls(tuple(entities), values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def with_values(self, values: Iterable[float]) -> "UtilityVector":
        return UtilityVector(self.entities, tuple(values))

    def permuted(self, order: Sequence[int]) -> "UtilityVector":
        return UtilityVector(tuple(self.entities[i] for i in order),
                             tuple(self.values[i] for i in order))

    def __add__(self, other: "UtilityVector") -> "UtilityVector":
        _check_same_entities([self, other])
        return self.with_values(a + b for a, b in zip(self.values, other.values))


@dataclass(frozen=True)
class History:
    """Realized utilities of past steps, oldest first.

    The last element is the step immediately before the current one (``t-1``).
    """

    steps: tuple[UtilityVector, ...] = ()

    def __post_init__(self):
        steps = tuple(self.steps)
        _check_same_entities(steps)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[float]],
                  entities: Iterable[str] | None = None) -> "History":
        """Build from step-major rows, e.g. ``[(2, 1), (1.5, 1.5)]``."""
        rows = [tuple(r) for r in rows]
        if entities is not None:
            entities = tuple(entities)
        return cls(tuple(UtilityVector.of(r, entities) for r in rows))

    @classmethod
    def from_columns(cls, columns: dict[str, Sequence[float]]) -> "History":
        """Build from entity-major columns, e.g. ``{"l1": [2, 1.5], "l2": [1, 1.5]}``."""
        names = tuple(columns)
        lengths = {len(c) for c in columns.values()}
        if len(lengths) > 1:
            raise StructuralError("all entities need the same number of steps")
        n = lengths.pop() if lengths else 0
        return cls(tuple(UtilityVector(names, tuple(columns[e][k] for e in names))
                         for k in range(n)))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return History(self.steps[item])
        return self.steps[item]

    @property
    def entities(self) -> tuple[str, ...] | None:
        return self.steps[0].entities if self.steps else None

    def appended(self, u: UtilityVector) -> "History":
        return History(self.steps + (u,))

    def window(self, size: int | None) -> "History":
        """Keep the ``size`` most recent steps (all of them when ``None``)."""
        if size is None:
            return self
        if size < 0:
            raise ValueError("window must be >= 0")
        return History(self.steps[len(self.steps) - size:] if size else ())

    def reversed(self) -> "History":
        return History(self.steps[::-1])

    def totals(self) -> UtilityVector | None:
        if not self.steps:
            return None
        return self.steps[0].with_values(np.sum([s.values for s in self.steps], axis=0))


@dataclass(frozen=True)
class DiscountSpec:
    gamma: float = 1.0  # weight base for past steps
    tau: float = 1.0  # weight base for planned steps

    def __post_init__(self):
        for name in ("gamma", "tau"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)


class Orientation(enum.Enum):
    HIGHER_IS_FAIRER = "higher"
    LOWER_IS_FAIRER = "lower"


class MetricKind(enum.Enum):
    RELATIVE_MAX_MIN = "rmm"
    QUADRATIC_MAX_MIN_GAP = "qmmg"
    MAXIMIN_RATIO = "mm"
    MAX_MIN_GAP = "gap"
    MINIMAX_COST = "minimax"

    @property
    def orientation(self) -> Orientation:
        if self in (MetricKind.MAX_MIN_GAP, MetricKind.MINIMAX_COST):
            return Orientation.LOWER_IS_FAIRER
        return Orientation.HIGHER_IS_FAIRER

    @classmethod
    def parse(cls, value: "str | MetricKind") -> "MetricKind":
        if isinstance(value, MetricKind):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown fairness metric {value!r}")


def _check_same_entities(vectors: Sequence[UtilityVector]) -> None:
    if not vectors:
        return
    first = vectors[0].entities
    for v in vectors[1:]:
        if v.entities != first:
            raise StructuralError(
                f"entity lists differ: {list(first)} vs {list(v.entities)}")


def _weight(base: float, power: int) -> float:
    # 0 ** 0 == 1 keeps the current step when gamma or tau is 0
    return 1.0 if power == 0 else base ** power


def discounted_totals(history: History | Sequence[UtilityVector],
                      plan: Sequence[UtilityVector],
                      disc: DiscountSpec | None = None) -> UtilityVector:
    """Per-entity discounted sum over history and plan.

    The last history step is weighted ``gamma**1``, the one before
    ``gamma**2`` and so on; plan step ``k`` (0-based) is weighted ``tau**k``.
    """
    disc = disc or DiscountSpec()
    steps = tuple(history.steps if isinstance(history, History) else history)
    plan = tuple(plan)
    if not plan:
        raise ValueError("plan must contain at least one step")
    _check_same_entities(steps + plan)
    n = len(plan[0])
    total = np.zeros(n)
    # accumulate oldest-first so gamma=tau=1 reproduces plain left-to-right sums
    for age, u in zip(range(len(steps), 0, -1), steps):
        w = _weight(disc.gamma, age)
        if w:
            total += w * np.asarray(u.values)
    for k, u in enumerate(plan):
        w = _weight(disc.tau, k)
        if w:
            total += w * np.asarray(u.values)
    return plan[0].with_values(np.maximum(total, 0.0))


def _spread(u: UtilityVector) -> float:
    return max(u.values) - min(u.values)


def rmm(u: UtilityVector) -> float:
    """Relative max-min fairness, ``1 - (max - min) / total``."""
    total = math.fsum(u.values)
    if total <= 0.0:
        return 1.0
    return 1.0 - _spread(u) / total


def qmmg(u: UtilityVector) -> float:
    """Quadratic max-min gap, ``-((max - min) / 2) ** 2``."""
    return -((_spread(u) / 2.0) ** 2)


def maximin_ratio(u: UtilityVector) -> float:
    hi = max(u.values)
    if hi <= 0.0:
        return 1.0
    return min(u.values) / hi


def max_min_gap(u: UtilityVector) -> float:
    return _spread(u)


def minimax_cost(u: UtilityVector) -> float:
    return max(u.values)


_PLAIN: dict[MetricKind, Callable[[UtilityVector], float]] = {
    MetricKind.RELATIVE_MAX_MIN: rmm,
    MetricKind.QUADRATIC_MAX_MIN_GAP: qmmg,
    MetricKind.MAXIMIN_RATIO: maximin_ratio,
    MetricKind.MAX_MIN_GAP: max_min_gap,
    MetricKind.MINIMAX_COST: minimax_cost,
}


def evaluate(metric: MetricKind | str, u: UtilityVector) -> float:
    return _PLAIN[MetricKind.parse(metric)](u)


def evaluate_temporal(metric: MetricKind | str, history, plan, disc=None) -> float:
    return evaluate(metric, discounted_totals(history, plan, disc))


def rmm_temporal(history, plan, disc=None) -> float:
    return rmm(discounted_totals(history, plan, disc))


def qmmg_temporal(history, plan, disc=None) -> float:
    return qmmg(discounted_totals(history, plan, disc))


def maximin_ratio_temporal(history, plan, disc=None) -> float:
    return maximin_ratio(discounted_totals(history, plan, disc))


def max_min_gap_temporal(history, plan, disc=None) -> float:
    return max_min_gap(discounted_totals(history, plan, disc))


def minimax_cost_temporal(history, plan, disc=None) -> float:
    return minimax_cost(discounted_totals(history, plan, disc))


def rmm_balanced_trajectory(history: History, per_step_total: float,
                            gamma: float, n_steps: int) -> list[float]:
    """Closed-form discounted relative max-min when every step from now on is
    perfectly balanced.

    Element ``x`` is the metric at step ``t + x``, i.e. with ``x`` balanced
    steps already appended to ``history`` and one more balanced step planned.
    Only valid for two-entity histories whose steps all have total
    ``per_step_total`` (the running course-assignment example); the gap
    term then only ever shrinks geometrically.
    """
    if per_step_total <= 0:
        raise ValueError("per_step_total must be positive")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    steps = history.steps
    if steps and len(steps[0]) != 2:
        raise ValueError("closed form needs exactly two entities")
    T = len(steps)
    # signed discounted gap at step t
    gap = math.fsum(_weight(gamma, T - k) * (s.values[0] - s.values[1])
                    for k, s in enumerate(steps))
    gap = abs(gap)
    out = []
    for x in range(n_steps):
        if gamma == 1.0:
            denom = per_step_total * (x + T + 1)
        elif gamma == 0.0:
            denom = per_step_total
        else:
            denom = per_step_total * (1.0 - gamma ** (x + T + 1)) / (1.0 - gamma)
        shrink = 1.0 if gamma == 1.0 else (0.0 if gamma == 0.0 and x > 0 else gamma ** x)
        out.append(1.0 - gap * shrink / denom)
    return out
