"""Temporally fair optimization: quality/fairness objectives over a history
of past solutions and a horizon of planned ones."""

from .estimator import TemporalFairOptimizer
from .fairness import (DiscountSpec, History, MetricKind, UtilityVector, discounted_totals,
                       evaluate, evaluate_temporal)
from .objective import (Formulation, FormulationSpec, ScoredPlan, canonical_fairness,
                        rolling_run, score, solve)

__version__ = "0.1.0"

__all__ = [
    "TemporalFairOptimizer", "DiscountSpec", "History", "MetricKind", "UtilityVector",
    "discounted_totals", "evaluate", "evaluate_temporal", "Formulation", "FormulationSpec",
    "ScoredPlan", "canonical_fairness", "rolling_run", "score", "solve",
]
