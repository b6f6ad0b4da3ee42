"""Command-line front end.

Exit codes: 0 success, 1 infeasible instance, 2 usage error (bad flags,
unreadable or malformed files), 3 internal numerical failure.

Defaults for ``--seed`` and ``--out-dir`` come from the environment
variables ``TEMPFAIR_SEED`` and ``TEMPFAIR_OUT_DIR`` when set; explicit flags
win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, history
from .domains.base import BackendMismatch, InfeasibleError
from .domains.io import FormatError, dumps, read
from .domains.nsp import example_instance
from .fairness import MetricKind
from .generators import (VRP_GRID, VRP_POINTS, VRP_VEHICLES, gen_nsp_histories, gen_tap,
                         gen_tap_run, gen_vrp, gen_vrp_history)
from .milp.model import NumericalError
from .objective import BACKENDS, Formulation, FormulationSpec, solve

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
ENV_PREFIX = "TEMPFAIR_"


class UsageError(Exception):
    pass


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name, default)


def _env_seed() -> int:
    raw = _env("SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}SEED must be an integer, got {raw!r}") from None


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _write_text(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# -- solve ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    try:
        instances = read(args.instance)
    except OSError as exc:
        raise UsageError(f"cannot read instance file: {exc}") from None
    kind = Formulation.parse(args.formulation)
    horizon = args.horizon or (len(instances) if kind is Formulation.MSDHFOP else 1)
    spec = FormulationSpec.make(kind, args.beta, args.gamma, args.tau, horizon, args.metric,
                                args.window)
    hist = None
    if args.history:
        if not Path(args.history).exists():
            raise UsageError(f"history log not found: {args.history}")
        hist = history.load_history(args.history)
    res = solve(spec, hist, instances, args.backend)
    report = {
        "formulation": {"kind": spec.kind.value, "beta": spec.beta, "gamma": spec.disc.gamma,
                        "tau": spec.disc.tau, "horizon": spec.horizon,
                        "metric": spec.metric.value},
        "plan": _jsonable(res.plan),
        "utilities": [dict(zip(u.entities, map(float, u.values)))
                      for u in res.per_step_utilities],
        "step_quality": list(res.step_quality),
        "quality_term": res.quality_term,
        "fairness_term": res.fairness_term,
        "total": res.total,
        "diagnostics": _jsonable(res.diagnostics),
    }
    _write_text(json.dumps(report, indent=2) + "\n", args.out)
    if args.append:
        recs = history.records(args.append)
        t = recs[-1].timestep + 1 if recs else 0
        history.append(args.append, history.RunRecord.from_scored(t, instances[0].domain, res, spec))
    return EXIT_OK


# -- reproduce / bench ---------------------------------------------------------------

def cmd_reproduce(args) -> int:
    if args.experiment not in experiments.EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.experiment!r}; expected one of "
                         f"{sorted(experiments.EXPERIMENTS)}")
    seed = _env_seed() if args.seed is None else args.seed
    out_dir = args.out_dir or _env("OUT_DIR", "results")
    result = experiments.run(args.experiment, seed)
    for p in experiments.write_result(result, out_dir):
        print(p)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.experiment not in experiments.BENCHMARKS:
        raise UsageError(f"no benchmark for {args.experiment!r}; expected one of "
                         f"{list(experiments.BENCHMARKS)}")
    if args.repeat < 1:
        raise UsageError("--repeat must be >= 1")
    seed = _env_seed() if args.seed is None else args.seed
    rows = experiments.bench(args.experiment, args.repeat, seed)
    if args.out:
        experiments.write_table(args.out, rows)
        print(args.out)
    else:
        print("formulation,mean_seconds,median_seconds,repeat")
        for r in rows:
            print(",".join(experiments._cell(r[k]) for k in
                           ("formulation", "mean_seconds", "median_seconds", "repeat")))
    return EXIT_OK


# -- gen -------------------------------------------------------------------------

def _write_log(path, hist, domain: str) -> None:
    if Path(path).exists():
        raise UsageError(f"refusing to overwrite existing log {path}")
    for t, u in enumerate(hist):
        history.append(path, history.RunRecord(t, domain, u))


def cmd_gen(args) -> int:
    seed = _env_seed() if args.seed is None else args.seed
    if args.domain == "vrp":
        inst = gen_vrp(args.grid, args.points, seed, args.vehicles)
        _write_text(dumps(inst), args.out)
        if args.history_out:
            _write_log(args.history_out,
                       gen_vrp_history(args.history_steps, args.grid, args.points, args.vehicles,
                                       seed=seed), "vrp")
    elif args.domain == "tap":
        if args.run:
            run = gen_tap_run(seed, args.n, args.n_constrained)
            _write_text(dumps(list(run.instances)), args.out)
            if args.history_out:
                _write_log(args.history_out, run.history, "tap")
        else:
            constrained = [int(a) for a in args.constrained.split(",") if a] \
                if args.constrained else ()
            _write_text(dumps(gen_tap(args.n, constrained, seed)), args.out)
    elif args.domain == "nsp":
        _write_text(dumps(example_instance()), args.out)
        if args.history_out:
            h1, h2 = gen_nsp_histories(seed)
            base = Path(args.history_out)
            _write_log(base.with_name(base.stem + "_H1" + base.suffix), h1, "nsp")
            _write_log(base.with_name(base.stem + "_H2" + base.suffix), h2, "nsp")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tempfair",
                                description="Temporally fair optimization experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file under one formulation")
    s.add_argument("instance", help="instance file (one block per planned step)")
    s.add_argument("history", nargs="?", help="history log of past steps")
    s.add_argument("--formulation", default="HFOP", type=str.upper,
                   choices=[f.value for f in Formulation])
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--horizon", type=int, default=None,
                   help="planned steps (MSDHFOP; default: number of instance blocks)")
    s.add_argument("--metric", default="rmm", choices=[m.value for m in MetricKind])
    s.add_argument("--backend", default="auto", choices=list(BACKENDS))
    s.add_argument("--window", type=int, default=None, help="use only the last N history steps")
    s.add_argument("--out", help="report path (default stdout)")
    s.add_argument("--append", metavar="LOG", help="append the committed step to this log")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reproduce", help="run a reproduction experiment and write CSV")
    r.add_argument("experiment", help=", ".join(experiments.EXPERIMENTS))
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out-dir", default=None)
    r.set_defaults(func=cmd_reproduce)

    g = sub.add_parser("gen", help="generate instance and history files")
    g.add_argument("domain", choices=["vrp", "tap", "nsp"])
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", help="instance path (default stdout)")
    g.add_argument("--history-out", help="write a generated history log here")
    g.add_argument("--grid", type=int, default=VRP_GRID)
    g.add_argument("--points", type=int, default=VRP_POINTS)
    g.add_argument("--vehicles", type=int, default=VRP_VEHICLES)
    g.add_argument("--history-steps", type=int, default=5)
    g.add_argument("--n", type=int, default=40)
    g.add_argument("--constrained", default="", help="comma-separated constrained agent indices")
    g.add_argument("--run", action="store_true", help="a full six-instance TAP run")
    g.add_argument("--n-constrained", type=int, default=8)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="wall time per formulation")
    b.add_argument("experiment", help=", ".join(experiments.BENCHMARKS))
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, FormatError, history.LogError, BackendMismatch, ValueError,
            KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
