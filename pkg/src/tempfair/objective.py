"""Quality/fairness objectives from plain optimization up to multi-step
discounted historical fairness, and the solvers that maximize them."""

from __future__ import annotations

import enum
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domains.base import (BackendMismatch, ConstraintViolation, DomainInstance,
                           InfeasibleError, StepIP, as_sequence)
from .fairness import (DiscountSpec, History, MetricKind, Orientation, UtilityVector,
                       _weight, evaluate)
from .milp import Constraint, LinearModel, Status, branch_and_bound, linearize_gap, linearize_minimax
from .milp.highs_lp import highs_milp

log = logging.getLogger(__name__)

BACKENDS = ("auto", "enumerate", "milp")


class Formulation(enum.Enum):
    OP = "OP"
    FOP = "FOP"
    HFOP = "HFOP"
    DHFOP = "DHFOP"
    MSDHFOP = "MSDHFOP"

    @classmethod
    def parse(cls, value) -> "Formulation":
        if isinstance(value, Formulation):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown formulation {value!r}; expected one of "
                             f"{[f.value for f in cls]}") from None

    @property
    def uses_history(self) -> bool:
        return self in (Formulation.HFOP, Formulation.DHFOP, Formulation.MSDHFOP)


@dataclass(frozen=True)
class FormulationSpec:
    """Which objective to maximize and with which parameters.

    ``horizon`` is the number of planned steps (only MSDHFOP plans more than
    one).  ``window`` keeps only that many most recent history steps.
    """

    kind: Formulation = Formulation.OP
    beta: float = 0.0
    disc: DiscountSpec = field(default_factory=DiscountSpec)
    horizon: int = 1
    metric: MetricKind = MetricKind.RELATIVE_MAX_MIN
    window: int | None = None

    def __post_init__(self):
        kind = Formulation.parse(self.kind)
        metric = MetricKind.parse(self.metric)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "beta", float(self.beta))
        if not self.beta >= 0:
            raise ValueError("beta must be >= 0")
        if kind in (Formulation.OP, Formulation.FOP, Formulation.HFOP) and (
                self.disc.gamma != 1.0 or self.disc.tau != 1.0):
            raise ValueError(f"{kind.value} takes no discounting (gamma = tau = 1)")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        object.__setattr__(self, "horizon", int(self.horizon))
        if kind is not Formulation.MSDHFOP and self.horizon != 1:
            raise ValueError(f"{kind.value} plans a single step (horizon 1)")
        if self.window is not None and self.window < 0:
            raise ValueError("window must be >= 0")

    @classmethod
    def make(cls, kind, beta: float = 0.0, gamma: float = 1.0, tau: float = 1.0,
             horizon: int = 1, metric="rmm", window: int | None = None) -> "FormulationSpec":
        return cls(Formulation.parse(kind), beta, DiscountSpec(gamma, tau), horizon,
                   MetricKind.parse(metric), window)

    @property
    def effective_beta(self) -> float:
        return 0.0 if self.kind is Formulation.OP else self.beta

    def relevant_history(self, history: History | None) -> History:
        if history is None or not self.kind.uses_history:
            return History()
        return history.window(self.window)


@dataclass
class ScoredPlan:
    plan: tuple
    quality_term: float
    fairness_term: float
    total: float
    per_step_utilities: tuple[UtilityVector, ...]
    raw_fairness: float = math.nan
    step_quality: tuple[float, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def committed(self):
        return self.plan[0]


def canonical_fairness(metric: MetricKind | str, raw: float) -> float:
    """Flip lower-is-fairer metrics so that larger is always fairer."""
    metric = MetricKind.parse(metric)
    if metric.orientation is Orientation.LOWER_IS_FAIRER:
        return -raw
    return raw


# -- shared arithmetic -----------------------------------------------------------
# score() and the enumeration search go through these two helpers so a
# solver's reported total is reproduced bit for bit.

def _history_part(history: History, disc: DiscountSpec, n: int) -> np.ndarray:
    total = np.zeros(n)
    steps = history.steps
    for age, u in zip(range(len(steps), 0, -1), steps):
        w = _weight(disc.gamma, age)
        if w:
            total += w * np.asarray(u.values)
    return total


def _objective_terms(spec: FormulationSpec, hist: np.ndarray, qualities: Sequence[float],
                     utilities: Sequence[np.ndarray]) -> tuple[float, float, float, float]:
    tau = spec.disc.tau
    total = hist.copy()
    quality = 0.0
    for k, (q, u) in enumerate(zip(qualities, utilities)):
        w = _weight(tau, k)
        quality += w * q
        if w:
            total += w * u
    beta = spec.effective_beta
    if spec.kind is Formulation.OP:
        return quality, 0.0, math.nan, quality
    # skip UtilityVector validation in the hot enumeration loop
    vec = UtilityVector.__new__(UtilityVector)
    object.__setattr__(vec, "entities", ())
    object.__setattr__(vec, "values", tuple(np.maximum(total, 0.0)))
    raw = evaluate(spec.metric, vec)
    raw = float(raw)
    fair = canonical_fairness(spec.metric, raw)
    return quality, fair, raw, quality + beta * fair


def _check_plan(spec: FormulationSpec, problems: Sequence[DomainInstance], plan: Sequence):
    if len(plan) != spec.horizon:
        raise ValueError(f"plan has {len(plan)} steps but horizon is {spec.horizon}")
    if len(problems) != len(plan):
        raise ValueError(f"{len(problems)} step instances for a plan of {len(plan)} steps")
    ents = problems[0].entities
    for k, (p, sol) in enumerate(zip(problems, plan)):
        if p.entities != ents:
            raise ValueError("all planned steps need the same entities")
        try:
            p.check(sol)
        except ConstraintViolation as exc:
            raise ConstraintViolation(exc.constraint, exc.detail, step=k) from None


def _problems(instances, horizon: int) -> list[DomainInstance]:
    problems = list(as_sequence(instances))
    if len(problems) == 1 and horizon > 1:
        problems = problems * horizon
    return problems


def score(spec: FormulationSpec, history: History | None, plan: Sequence,
          instances) -> ScoredPlan:
    """Evaluate ``plan`` (one solution per planned step) under ``spec``."""
    problems = _problems(instances, spec.horizon)
    plan = tuple(plan)
    _check_plan(spec, problems, plan)
    hist = spec.relevant_history(history)
    ents = problems[0].entities
    if hist.entities is not None and hist.entities != ents:
        raise ValueError(f"history entities {hist.entities} differ from instance entities {ents}")
    utils = [np.asarray(p.utility_values(s), dtype=float) for p, s in zip(problems, plan)]
    quals = [float(p.quality(s)) for p, s in zip(problems, plan)]
    q, f, raw, total = _objective_terms(spec, _history_part(hist, spec.disc, len(ents)), quals, utils)
    return ScoredPlan(plan, q, f, total,
                      tuple(UtilityVector(ents, tuple(u)) for u in utils), raw, tuple(quals))


def _better(a: float, b: float) -> bool:
    return a > b + 1e-9 * max(1.0, abs(b))


def _solve_enumerate(spec, hist, problems):
    n = len(problems[0].entities)
    base = _history_part(hist, spec.disc, n)
    if len(problems) == 1:
        sol = problems[0].exact_search(spec.effective_beta, spec.metric.value, base)
        if sol is not None:
            return (sol,), {"search": "exact"}
    pools = [p.distinct_candidates() for p in problems]
    best, best_total = None, -math.inf
    for combo in itertools.product(*pools):
        *_, total = _objective_terms(spec, base, [c.quality for c in combo],
                                     [c.utilities for c in combo])
        if best is None or _better(total, best_total):
            best, best_total = combo, total
    if best is None:
        raise InfeasibleError("no feasible plan")
    return tuple(c.solution for c in best), {"candidates": [len(p) for p in pools]}


def compile_plan(spec: FormulationSpec, hist: History, problems: Sequence[DomainInstance]):
    """Stack per-step integer programs and add the linearized fairness term.

    Returns ``(model, separator, decode)``; ``decode(x)`` yields the plan.
    """
    if spec.kind is not Formulation.OP and spec.effective_beta > 0 and \
            spec.metric not in (MetricKind.MAX_MIN_GAP, MetricKind.MINIMAX_COST):
        raise BackendMismatch(f"metric {spec.metric.value} has no linear form; use the enumerate backend")
    steps: list[StepIP] = [p.build_ip() for p in problems]
    model = LinearModel("plan")
    maps = []
    for k, st in enumerate(steps):
        mapping = np.empty(st.model.n_vars, dtype=int)
        for j, var in enumerate(st.model.variables):
            mapping[j] = model.add_var(f"s{k}_{var.name}", var.lb, var.ub, var.integer)
        for con in st.model.constraints:
            model.add(Constraint(tuple((int(mapping[j]), c) for j, c in con.coeffs),
                                 con.sense, con.rhs, f"s{k}_{con.name}"))
        maps.append(mapping)
    tau = spec.disc.tau
    weights = [_weight(tau, k) for k in range(len(steps))]
    objective: dict[int, float] = {}
    constant = 0.0
    for w, st, mp in zip(weights, steps, maps):
        for j, c in st.quality.items():
            objective[int(mp[j])] = objective.get(int(mp[j]), 0.0) + w * c
        constant += w * st.quality_constant
    beta = spec.effective_beta
    if spec.kind is not Formulation.OP and beta > 0:
        n_ent = len(problems[0].entities)
        exprs = []
        for e in range(n_ent):
            expr: dict[int, float] = {}
            for w, st, mp in zip(weights, steps, maps):
                if not w:
                    continue
                for j, c in st.utilities[e].items():
                    expr[int(mp[j])] = expr.get(int(mp[j]), 0.0) + w * c
            exprs.append(expr)
        offsets = _history_part(hist, spec.disc, n_ent)
        if spec.metric is MetricKind.MINIMAX_COST:
            model, M = linearize_minimax(model, exprs, offsets)
            objective[M] = objective.get(M, 0.0) - beta
        else:
            model, M, m = linearize_gap(model, exprs, offsets)
            objective[M] = objective.get(M, 0.0) - beta
            objective[m] = objective.get(m, 0.0) + beta
    model.set_objective(objective, "max", constant)

    separators = [(st.separator, mp) for st, mp in zip(steps, maps) if st.separator is not None]
    separator = None
    if separators:
        def separator(x, integral):
            cuts = []
            for sep, mp in separators:
                for con in sep(x[mp], integral):
                    cuts.append(Constraint(tuple((int(mp[j]), c) for j, c in con.coeffs),
                                           con.sense, con.rhs, con.name))
            return cuts
    fractional = any(st.separate_fractional for st in steps)

    def decode(x):
        return tuple(st.decode(x[mp]) for st, mp in zip(steps, maps))

    return model, separator, fractional, decode


def _solve_milp(spec, hist, problems, engine: str = "bb", **bb_options):
    model, separator, fractional, decode = compile_plan(spec, hist, problems)
    if engine == "bb":
        res = branch_and_bound(model, separator, separate_fractional=fractional, **bb_options)
    elif engine == "highs":
        res = highs_milp(model, separator, **bb_options)
    else:
        raise BackendMismatch(f"unknown integer-program engine {engine!r}")
    diag = {"engine": engine, "status": res.status.value, "node_count": res.node_count, "lp_count": res.lp_count,
            "cuts": res.cuts_added, "lp_objective": res.objective}
    if res.status is Status.INFEASIBLE:
        raise InfeasibleError("integer program is infeasible")
    if res.x is None:
        raise InfeasibleError(f"no integer solution found ({res.status.value})")
    if res.status is Status.NODE_LIMIT:
        log.warning("node limit reached; returning incumbent (bound %.6g)", res.bound)
    return decode(res.x), diag


def solve(spec: FormulationSpec, history: History | None, instances,
          backend: str = "auto", **bb_options) -> ScoredPlan:
    """Maximize ``spec``'s objective over plans for ``instances``.

    ``instances`` is one :class:`DomainInstance` per planned step (a single
    instance is repeated over the horizon).  Ties resolve to the canonically
    first plan with the enumeration backend; the MILP backend is
    deterministic but makes no lexicographic promise.  ``"auto"`` uses the
    domain's exact single-step search when it has one, otherwise the
    domain's default backend.
    """
    if backend not in BACKENDS:
        raise BackendMismatch(f"unknown backend {backend!r}")
    problems = _problems(instances, spec.horizon)
    if len(problems) != spec.horizon:
        raise ValueError(f"{len(problems)} step instances for horizon {spec.horizon}")
    hist = spec.relevant_history(history)
    ents = problems[0].entities
    if any(p.entities != ents for p in problems):
        raise ValueError("all planned steps need the same entities")
    if hist.entities is not None and hist.entities != ents:
        raise ValueError(f"history entities {hist.entities} differ from instance entities {ents}")
    start = time.perf_counter()
    exact = None
    if backend == "auto":
        # a domain's exact single-step search beats either generic backend
        if len(problems) == 1:
            exact = problems[0].exact_search(spec.effective_beta, spec.metric.value,
                                             _history_part(hist, spec.disc, len(ents)))
        backend = problems[0].default_backend
    if exact is not None:
        plan, diag = (exact,), {"search": "exact"}
        backend = "exact"
    elif backend == "enumerate":
        plan, diag = _solve_enumerate(spec, hist, problems)
    else:
        plan, diag = _solve_milp(spec, hist, problems, **bb_options)
    diag["backend"] = backend
    diag["elapsed"] = time.perf_counter() - start
    scored = score(spec, history, plan, problems)
    scored.diagnostics = diag
    return scored


def rolling_run(spec: FormulationSpec, initial_history: History | None, instances,
                backend: str = "auto", **bb_options) -> list[ScoredPlan]:
    """Solve step after step, appending each committed step's utilities to
    the history before solving the next.

    MSDHFOP plans ``horizon`` steps ahead (fewer near the end of
    ``instances``) and commits only the first one.
    """
    instances = list(instances)
    history = initial_history or History()
    out = []
    for k in range(len(instances)):
        window = instances[k:k + spec.horizon]
        step_spec = spec
        if len(window) < spec.horizon:
            step_spec = FormulationSpec(spec.kind, spec.beta, spec.disc, len(window),
                                        spec.metric, spec.window)
        scored = solve(step_spec, history, window, backend, **bb_options)
        out.append(scored)
        history = history.appended(scored.per_step_utilities[0])
    return out


def commit_scores(spec: FormulationSpec, initial_history: History | None, instances,
                  plans: Sequence) -> list[ScoredPlan]:
    """Score each committed step of a rolling run as a one-step plan
    against the history realized so far (what the step-wise figures show)."""
    history = initial_history or History()
    single = spec if spec.horizon == 1 else FormulationSpec(
        spec.kind, spec.beta, spec.disc, 1, spec.metric, spec.window)
    out = []
    for inst, sol in zip(instances, plans):
        s = score(single, history, (sol,), [inst])
        out.append(s)
        history = history.appended(s.per_step_utilities[0])
    return out
