"""scikit-learn style facade: ``fit`` on a history, ``predict`` a plan."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .domains.base import as_sequence
from .fairness import History, UtilityVector
from .objective import FormulationSpec, rolling_run, score, solve
from .validation import (check_history, check_nonnegative, check_positive_int,
                         check_unit_interval)


class TemporalFairOptimizer(BaseEstimator):
    """Pick solutions that trade quality against temporal fairness.

    Parameters
    ----------
    formulation : {"OP", "FOP", "HFOP", "DHFOP", "MSDHFOP"}
    beta : float
        Weight of the fairness term.
    gamma, tau : float
        Discount bases for past and planned steps.
    horizon : int
        Planned steps (MSDHFOP only).
    metric : str
        ``rmm``, ``qmmg``, ``mm``, ``gap`` or ``minimax``.
    backend : {"auto", "enumerate", "milp"}
    window : int or None
        Keep only the most recent ``window`` history steps.

    Attributes
    ----------
    history_ : History
        History seen by ``fit`` plus anything added by ``partial_fit``.
    entities_ : tuple of str or None
    spec_ : FormulationSpec
    """

    def __init__(self, formulation="HFOP", beta=1.0, gamma=1.0, tau=1.0, horizon=1,
                 metric="rmm", backend="auto", window=None):
        self.formulation = formulation
        self.beta = beta
        self.gamma = gamma
        self.tau = tau
        self.horizon = horizon
        self.metric = metric
        self.backend = backend
        self.window = window

    def _spec(self) -> FormulationSpec:
        check_nonnegative("beta", self.beta)
        check_unit_interval("gamma", self.gamma)
        check_unit_interval("tau", self.tau)
        check_positive_int("horizon", self.horizon)
        if self.window is not None:
            check_nonnegative("window", self.window)
        return FormulationSpec.make(self.formulation, self.beta, self.gamma, self.tau,
                                    self.horizon, self.metric, self.window)

    def fit(self, history=None, y=None, entities=None):
        """Validate parameters and store the history (``y`` is ignored).

        ``history`` is a :class:`History`, a list of utility vectors or a
        ``(steps, entities)`` array.  Unnamed array columns take the entity
        names of the instances passed to ``predict``.
        """
        self.spec_ = self._spec()
        self.history_ = check_history(_rows(history), entities)
        self._named = entities is not None or isinstance(history, History) or (
            bool(history is not None and len(history)) and isinstance(history[0], UtilityVector))
        self.entities_ = self.history_.entities if self._named else None
        return self

    def partial_fit(self, utilities, y=None):
        """Append realized utilities: one step (1-d) or several (rows)."""
        check_is_fitted(self, "history_")
        if isinstance(utilities, UtilityVector):
            utilities = [utilities]
        extra = check_history(_rows(utilities), self.entities_)
        base = self.history_
        if base.entities is not None and extra.entities != base.entities:
            extra = History(tuple(UtilityVector(base.entities, s.values) for s in extra.steps))
        self.history_ = History(base.steps + extra.steps)
        return self

    def _problems(self, instances):
        problems = list(as_sequence(instances))
        if self.entities_ is not None and problems and problems[0].entities != self.entities_:
            raise ValueError(f"instance entities {problems[0].entities} differ from "
                             f"fitted entities {self.entities_}")
        return problems

    def _history(self, problems) -> History:
        hist = self.history_
        if not self._named and hist.steps:
            ents = problems[0].entities
            if len(ents) != len(hist.steps[0]):
                raise ValueError(f"history has {len(hist.steps[0])} columns for "
                                 f"{len(ents)} entities")
            hist = History(tuple(UtilityVector(ents, s.values) for s in hist.steps))
        return hist

    def solve(self, instances):
        """Full :class:`ScoredPlan` for ``instances`` (one per planned step)."""
        check_is_fitted(self, "history_")
        problems = self._problems(instances)
        return solve(self.spec_, self._history(problems), problems, self.backend)

    def predict(self, instances):
        """Best plan: a tuple with one solution per planned step."""
        return self.solve(instances).plan

    def score(self, instances, plan=None):
        """Objective value of ``plan`` (the predicted plan when omitted)."""
        check_is_fitted(self, "history_")
        problems = self._problems(instances)
        if plan is None:
            plan = self.predict(problems)
        return score(self.spec_, self._history(problems), plan, problems).total

    def run(self, instances, commit: bool = True):
        """Rolling run over ``instances``; appends committed steps when ``commit``."""
        check_is_fitted(self, "history_")
        problems = self._problems(instances)
        hist = self._history(problems)
        out = rolling_run(self.spec_, hist, problems, self.backend)
        if commit:
            self.history_ = History(hist.steps + tuple(s.per_step_utilities[0] for s in out))
            self.entities_ = problems[0].entities if problems else self.entities_
            self._named = self.entities_ is not None
        return out


def _rows(data):
    """Lift a single step given as a flat sequence of numbers to one row."""
    if data is None or isinstance(data, History):
        return data
    if len(data) and isinstance(data[0], UtilityVector):
        return data
    arr = np.asarray(data, dtype=float)
    return arr[None, :] if arr.ndim == 1 else arr
