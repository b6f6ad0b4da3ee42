"""Input checks shared by the estimator facade and the CLI."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .fairness import History, UtilityVector


def check_history(history, entities=None) -> History:
    """Accept a :class:`History`, a sequence of :class:`UtilityVector` or a
    ``(steps, entities)`` array of nonnegative utilities."""
    if history is None:
        return History()
    if isinstance(history, History):
        hist = history
    elif len(history) and all(isinstance(u, UtilityVector) for u in history):
        hist = History(tuple(history))
    else:
        arr = check_array(history, ensure_min_samples=0, ensure_all_finite=True,
                          dtype=np.float64)
        if np.any(arr < 0):
            raise ValueError("utilities must be >= 0")
        hist = History.from_rows(arr.tolist(), entities)
    if entities is not None and hist.entities is not None and hist.entities != tuple(entities):
        raise ValueError(f"history entities {hist.entities} differ from {tuple(entities)}")
    return hist


def check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_nonnegative(name: str, value: float) -> float:
    value = float(value)
    if not value >= 0.0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_positive_int(name: str, value) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value}")
    return int(value)
