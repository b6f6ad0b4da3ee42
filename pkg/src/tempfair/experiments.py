"""Reproduction experiments as tidy tables.

Every experiment returns an :class:`ExperimentResult` with per-(step,
series) ``rows``, a compact ``summary`` table, and optional
``timings``.  Wall times live in their own table so the first two are
byte-identical across runs with the same seed.
"""

from __future__ import annotations

import csv
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .domains.cap import CapInstance
from .domains.nsp import example_instance
from .fairness import (DiscountSpec, History, UtilityVector, maximin_ratio,
                       maximin_ratio_temporal, max_min_gap, qmmg, rmm, rmm_balanced_trajectory,
                       rmm_temporal)
from .generators import gen_nsp_histories, gen_tap_run, gen_vrp, gen_vrp_history
from .objective import FormulationSpec, rolling_run, solve

BETA_SWEEP = (0.125, 0.25, 0.75, 2.0)
GAMMA_SWEEP = (0.25, 0.5, 0.9)
VRP_BETA = 10.0
TAP_BETA = 10.0
TAP_RUNS = 10
TAP_DISCOUNT = 0.75
NSP_BETA = 2.0
NSP_GAMMA = 0.65


@dataclass
class ExperimentResult:
    name: str
    rows: list[dict]
    summary: list[dict]
    timings: list[dict] = field(default_factory=list)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            v = 0.0  # no "-0"
        return format(v, ".10g")
    if isinstance(v, (tuple, list)):
        return "(" + ",".join(_cell(x) for x in v) + ")"
    return str(v)


def write_table(path, rows: list[dict]) -> Path:
    path = Path(path)
    header: list[str] = []
    for r in rows:
        for k in r:
            if k not in header:
                header.append(k)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(r.get(k, "")) for k in header])
    return path


def write_result(result: ExperimentResult, out_dir) -> list[Path]:
    """Write ``<id>.csv``, ``<id>_summary.csv`` and, if any, ``<id>_timing.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_table(out / f"{result.name}.csv", result.rows),
             write_table(out / f"{result.name}_summary.csv", result.summary)]
    if result.timings:
        paths.append(write_table(out / f"{result.name}_timing.csv", result.timings))
    return paths


# -- course assignment ----------------------------------------------------------

def running_history() -> History:
    """Four past semesters of the two-lecturer running example."""
    return History.from_columns({"l1": [2, 1.5, 3, 2], "l2": [1, 1.5, 0, 1]})


def load_vector(l1: float, l2: float) -> UtilityVector:
    return UtilityVector(("l1", "l2"), (float(l1), float(l2)))


def _label(u: UtilityVector) -> str:
    return "x_(" + ",".join(format(float(v), "g") for v in u.values) + ")"


def compare_f_fh(seed=None) -> ExperimentResult:
    """Plain versus historical relative max-min for three single-step plans,
    plus the discounted multi-step values of three two-step plans."""
    H = running_history()
    rows, summary = [], []
    for l1, l2 in ((1.5, 1.5), (1, 2), (0, 3)):
        x = load_vector(l1, l2)
        F, FH = rmm(x), rmm_temporal(H, [x])
        rows.append({"table": "single", "x_t": _label(x), "x_t1": "", "F": F, "F_H": FH})
        summary.append({"x_t": _label(x), "F": round(F, 2), "F_H": round(FH, 2)})
    nxt = load_vector(0, 3)
    for l1, l2 in ((0, 3), (0.5, 2.5), (1.5, 1.5)):
        x = load_vector(l1, l2)
        v = rmm_temporal(H, [x, nxt], DiscountSpec(1.0, 1.0))
        rows.append({"table": "two-step", "x_t": _label(x), "x_t1": _label(nxt), "F": "",
                     "F_H": v})
    return ExperimentResult("compare-F-FH", rows, summary)


def _no_quality_cap() -> CapInstance:
    return CapInstance.uniform([0, 0], 3, lecturers=("l1", "l2"))


def fop_vs_hfop(seed=None, steps: int = 101) -> ExperimentResult:
    """FOP and HFOP on the running example; quality is flat, so both only
    chase fairness.  ``closed_form`` is the balanced-load trajectory."""
    H = running_history()
    inst = _no_quality_cap()
    rows, summary = [], []
    closed = [1 - 5 / (3 * d + 15) for d in range(steps)]
    for kind in ("FOP", "HFOP"):
        runs = rolling_run(FormulationSpec.make(kind, beta=1.0), H, [inst] * steps)
        hist = H
        reached = None
        for d, r in enumerate(runs):
            x = r.per_step_utilities[0]
            fh = rmm_temporal(hist, [x])
            hist = hist.appended(x)
            if reached is None and fh >= 1.0 - 1e-9:
                reached = d
            rows.append({"series": kind, "step": d, "l1": x.values[0], "l2": x.values[1],
                         "F": rmm(x), "F_H": fh,
                         "closed_form": closed[d] if kind == "FOP" else ""})
        summary.append({"formulation": kind, "x_t": _label(runs[0].per_step_utilities[0]),
                        "x_t1": _label(runs[1].per_step_utilities[0]),
                        "x_t2": _label(runs[2].per_step_utilities[0]),
                        "first_step_F_H_1": "" if reached is None else reached})
    return ExperimentResult("fop-vs-hfop", rows, summary)


def gamma_sweep(seed=None, gammas=GAMMA_SWEEP, steps: int = 40,
                threshold: float = 0.99) -> ExperimentResult:
    """Discounted fairness when every step from ``t`` on is balanced.

    ``x`` counts balanced steps already committed after ``t``; ``value`` is
    the discounted metric with one more balanced step planned.
    """
    H = running_history()
    bal = load_vector(1.5, 1.5)
    rows, summary = [], []
    for g in gammas:
        closed = rmm_balanced_trajectory(H, 3.0, g, steps)
        disc = DiscountSpec(g, 1.0)
        hist = H
        first = None
        for x in range(steps):
            v = rmm_temporal(hist, [bal], disc)
            if first is None and v >= threshold:
                first = x
            rows.append({"gamma": g, "x": x, "value": v, "closed_form": closed[x]})
            hist = hist.appended(bal)
        summary.append({"gamma": g, "first_step_ge_0.99": "" if first is None else first})
    return ExperimentResult("gamma-sweep", rows, summary)


def beta_sweep_instance() -> CapInstance:
    return CapInstance.uniform([2, 1.5, 0], 2, q_max=4)


def beta_sweep(seed=None, betas=BETA_SWEEP, steps: int = 10) -> ExperimentResult:
    """HFOP with the quadratic gap from an empty history; ``F`` is the
    per-step quadratic gap of the committed loads."""
    inst = beta_sweep_instance()
    rows, summary = [], []
    for b in betas:
        runs = rolling_run(FormulationSpec.make("HFOP", beta=b, metric="qmmg"), History(),
                           [inst] * steps)
        qs, fs = [], []
        for k, r in enumerate(runs):
            u = r.per_step_utilities[0]
            q, f = r.step_quality[0], qmmg(u)
            qs.append(q)
            fs.append(f)
            rows.append({"beta": b, "step": k, "Q": q, "F": f,
                         **{e: v for e, v in zip(u.entities, u.values)}})
        summary.append({"beta": b, "mean_Q": math.fsum(qs) / len(qs),
                        "mean_F": math.fsum(fs) / len(fs)})
    return ExperimentResult("beta-sweep", rows, summary)


def forecast_instances() -> list[CapInstance]:
    """Two semesters with both lecturers, then two with ``l1`` on sabbatical."""
    base = CapInstance.uniform([2, 1], 2, q_max=1, lecturers=("l1", "l2"))
    return [base, base, base.with_unavailable({"l1"}), base.with_unavailable({"l1"})]


def forecast(seed=None) -> ExperimentResult:
    """HFOP step by step versus one four-step MSDHFOP plan (beta 2, mm)."""
    insts = forecast_instances()
    hf = rolling_run(FormulationSpec.make("HFOP", beta=2.0, metric="mm"), History(), insts)
    ms = solve(FormulationSpec.make("MSDHFOP", beta=2.0, horizon=4, metric="mm"), History(), insts)
    plans = {"HFOP": ([r.per_step_utilities[0] for r in hf], [r.step_quality[0] for r in hf]),
             "MSDHFOP": (list(ms.per_step_utilities), list(ms.step_quality))}
    rows, summary = [], []
    for kind, (utils, quals) in plans.items():
        for k, (u, q) in enumerate(zip(utils, quals)):
            rows.append({"formulation": kind, "step": k, "l1": u.values[0], "l2": u.values[1],
                         "Q": q})
        total = utils[0]
        for u in utils[1:]:
            total = total + u
        summary.append({"formulation": kind,
                        **{f"x_t{k}": _label(u) for k, u in enumerate(utils)},
                        "sum_Q": math.fsum(quals), "F": round(maximin_ratio(total), 2)})
    return ExperimentResult("forecast", rows, summary)


# -- vehicle routing ------------------------------------------------------------

def vrp_setup(seed=0, k_steps: int = 5):
    """Generated history (``k_steps`` OP solutions) and a fresh instance."""
    hist = gen_vrp_history(k_steps=k_steps, seed=seed)
    child = np.random.SeedSequence(seed).spawn(k_steps + 1)[-1]
    return hist, gen_vrp(seed=child)


def _vrp_specs(beta: float):
    return {"OP": FormulationSpec.make("OP"),
            "FOP": FormulationSpec.make("FOP", beta=beta, metric="gap"),
            "HFOP": FormulationSpec.make("HFOP", beta=beta, metric="gap")}


def vrp(seed=0, beta: float = VRP_BETA, backend: str = "auto") -> ExperimentResult:
    """OP, FOP and HFOP on one routing instance after a generated history."""
    hist, inst = vrp_setup(seed)
    cum = hist.totals()
    rows, summary, timings = [], [], []
    summary.append({"formulation": "history", **dict(zip(cum.entities, cum.values)),
                    "total": math.fsum(cum.values), "gap": max_min_gap(cum)})
    for kind, spec in _vrp_specs(beta).items():
        start = time.perf_counter()
        res = solve(spec, hist, inst, backend)
        elapsed = time.perf_counter() - start
        u = res.per_step_utilities[0]
        for v, (veh, d) in enumerate(zip(u.entities, u.values)):
            rows.append({"formulation": kind, "vehicle": veh, "history": cum.values[v],
                         "distance": d, "route": "-".join(map(str, res.plan[0][v]))})
        summary.append({"formulation": kind, **dict(zip(u.entities, u.values)),
                        "total": math.fsum(u.values), "gap": max_min_gap(u)})
        timings.append({"formulation": kind, "seconds": elapsed,
                        "backend": res.diagnostics.get("backend", "")})
    return ExperimentResult("vrp", rows, summary, timings)


# -- task assignment ------------------------------------------------------------

def _tap_specs(beta: float, discount: float, horizon: int):
    return {"OP": FormulationSpec.make("OP"),
            "FOP": FormulationSpec.make("FOP", beta=beta, metric="minimax"),
            "HFOP": FormulationSpec.make("HFOP", beta=beta, metric="minimax"),
            "MSDHFOP": FormulationSpec.make("MSDHFOP", beta=beta, gamma=discount, tau=discount,
                                            horizon=horizon, metric="minimax")}


def tap_run(run_seed, beta: float = TAP_BETA, discount: float = TAP_DISCOUNT,
            n: int = 40, n_constrained: int = 8) -> list[dict]:
    """One run: four formulations over the six instances of ``gen_tap_run``."""
    run = gen_tap_run(run_seed, n, n_constrained)
    W, C = list(run.W), list(run.C)
    others = [a for a in range(n) if a not in run.W]
    out = []
    for kind, spec in _tap_specs(beta, discount, len(run.instances)).items():
        start = time.perf_counter()
        if kind == "MSDHFOP":
            res = solve(spec, run.history, run.instances, "milp", engine="highs")
            costs = np.array([u.values for u in res.per_step_utilities])
        else:
            steps = rolling_run(spec, run.history, run.instances)
            costs = np.array([r.per_step_utilities[0].values for r in steps])
        elapsed = time.perf_counter() - start
        per_agent = costs.sum(axis=0)
        out.append({"formulation": kind,
                    "max_cost_30": int(np.sum(costs.max(axis=1) >= 30.0)),
                    "sum_of_costs": float(costs.sum() / len(costs)),
                    "cost_W": float(per_agent[W].mean()),
                    "cost_not_W": float(per_agent[others].mean()),
                    "cost_C_first3": float(costs[:3][:, C].sum(axis=0).mean()),
                    "cost_C_last3": float(costs[3:][:, C].sum(axis=0).mean()),
                    "seconds_per_instance": elapsed / len(costs)})
    return out


def tap(seed=0, runs: int = TAP_RUNS, beta: float = TAP_BETA,
        discount: float = TAP_DISCOUNT) -> ExperimentResult:
    """Ten runs; each run's seed is spawned from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(runs)
    rows, timings = [], []
    for i, child in enumerate(children):
        for rec in tap_run(child, beta, discount):
            secs = rec.pop("seconds_per_instance")
            rows.append({"run": i, **rec})
            timings.append({"run": i, "formulation": rec["formulation"],
                            "seconds_per_instance": secs})
    summary = []
    cols = ("max_cost_30", "sum_of_costs", "cost_W", "cost_not_W", "cost_C_first3",
            "cost_C_last3")
    for kind in _tap_specs(beta, discount, 6):
        sel = [r for r in rows if r["formulation"] == kind]
        entry = {"formulation": kind}
        for c in cols:
            vals = np.array([r[c] for r in sel], dtype=float)
            entry[c + "_mean"] = float(vals.mean())
            entry[c + "_std"] = float(vals.std())
        summary.append(entry)
    return ExperimentResult("tap", rows, summary, timings)


# -- nurse scheduling -----------------------------------------------------------

def nsp(seed=0, beta: float = NSP_BETA, gamma: float = NSP_GAMMA) -> ExperimentResult:
    """FOP, HFOP and DHFOP under two histories with opposite fairness trends."""
    H1, H2 = gen_nsp_histories(seed)
    inst = example_instance()
    disc = DiscountSpec(gamma, 1.0)
    rows, summary = [], []
    for name, H in (("H1", H1), ("H2", H2)):
        for k in range(len(H)):
            past, cur = H.steps[:k], [H.steps[k]]
            rows.append({"history": name, "week": k - len(H), "F": maximin_ratio(H.steps[k]),
                         "F_H": maximin_ratio_temporal(past, cur),
                         "F_H_gamma": maximin_ratio_temporal(past, cur, disc)})
    specs = {"FOP": FormulationSpec.make("FOP", beta=beta, metric="mm"),
             "HFOP": FormulationSpec.make("HFOP", beta=beta, metric="mm"),
             "DHFOP": FormulationSpec.make("DHFOP", beta=beta, gamma=gamma, metric="mm")}
    for kind, spec in specs.items():
        for name, H in (("H1", H1), ("H2", H2)):
            res = solve(spec, H, inst)
            u = res.per_step_utilities[0]
            summary.append({"formulation": kind, "history": name, "Q": res.step_quality[0],
                            "F": maximin_ratio(u), "objective": res.total,
                            "utilities": tuple(u.values),
                            "schedule": "".join(str(s + 1) for s in res.plan[0])})
    return ExperimentResult("nsp", rows, summary)


EXPERIMENTS: dict[str, Callable[..., ExperimentResult]] = {
    "compare-F-FH": compare_f_fh,
    "fop-vs-hfop": fop_vs_hfop,
    "gamma-sweep": gamma_sweep,
    "beta-sweep": beta_sweep,
    "forecast": forecast,
    "vrp": vrp,
    "tap": tap,
    "nsp": nsp,
}


def run(experiment: str, seed=0, **options) -> ExperimentResult:
    try:
        fn = EXPERIMENTS[experiment]
    except KeyError:
        raise KeyError(f"unknown experiment {experiment!r}; expected one of "
                       f"{sorted(EXPERIMENTS)}") from None
    return fn(seed, **options)


# -- timing ---------------------------------------------------------------------

def _bench_cases(experiment: str, seed) -> dict[str, Callable[[], object]]:
    if experiment == "vrp":
        hist, inst = vrp_setup(seed)
        return {k: (lambda s=s: solve(s, hist, inst)) for k, s in _vrp_specs(VRP_BETA).items()}
    if experiment == "tap":
        run_ = gen_tap_run(np.random.SeedSequence(seed).spawn(1)[0])
        cases = {}
        for k, s in _tap_specs(TAP_BETA, TAP_DISCOUNT, 6).items():
            if k == "MSDHFOP":
                cases[k] = lambda s=s: solve(s, run_.history, run_.instances, "milp",
                                             engine="highs")
            else:
                cases[k] = lambda s=s: rolling_run(s, run_.history, run_.instances)
        return cases
    if experiment == "nsp":
        H1, _ = gen_nsp_histories(seed)
        inst = example_instance()
        return {k: (lambda s=s: solve(s, H1, inst)) for k, s in {
            "FOP": FormulationSpec.make("FOP", beta=NSP_BETA, metric="mm"),
            "HFOP": FormulationSpec.make("HFOP", beta=NSP_BETA, metric="mm"),
            "DHFOP": FormulationSpec.make("DHFOP", beta=NSP_BETA, gamma=NSP_GAMMA,
                                          metric="mm")}.items()}
    if experiment == "forecast":
        insts = forecast_instances()
        return {"HFOP": lambda: rolling_run(FormulationSpec.make("HFOP", beta=2.0, metric="mm"),
                                            History(), insts),
                "MSDHFOP": lambda: solve(FormulationSpec.make("MSDHFOP", beta=2.0, horizon=4,
                                                              metric="mm"), History(), insts)}
    raise KeyError(f"no benchmark for {experiment!r}; expected one of "
                   f"['forecast', 'nsp', 'tap', 'vrp']")


BENCHMARKS = ("forecast", "nsp", "tap", "vrp")


def bench(experiment: str, repeat: int = 3, seed=0) -> list[dict]:
    """Wall time per formulation: one row with mean and median seconds."""
    if int(repeat) != repeat or repeat < 1:
        raise ValueError("repeat must be a positive integer")
    cases = _bench_cases(experiment, seed)
    out = []
    for kind, fn in cases.items():
        times = []
        for _ in range(int(repeat)):
            start = time.perf_counter()
            fn()
            times.append(time.perf_counter() - start)
        out.append({"formulation": kind, "mean_seconds": statistics.fmean(times),
                    "median_seconds": statistics.median(times), "repeat": int(repeat)})
    return out
