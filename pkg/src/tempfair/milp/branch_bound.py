"""Best-bound branch and bound with lazy constraint separation."""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from typing import Callable, Iterable, Optional

import numpy as np

from .model import Constraint, LinearModel, SolveResult, Status
from .simplex import simplex_solve

log = logging.getLogger(__name__)

INT_TOL = 1e-6

#: ``separator(x, integral) -> iterable of violated constraints``.
Separator = Callable[[np.ndarray, bool], Iterable[Constraint]]


def _fractionality(x: np.ndarray, int_idx: np.ndarray) -> np.ndarray:
    vals = x[int_idx]
    return np.abs(vals - np.round(vals))


def branch_and_bound(model: LinearModel, separator: Optional[Separator] = None, *,
                     separate_fractional: bool = False, node_limit: int = 200_000,
                     time_limit: float | None = None, max_cut_rounds: int = 50,
                     lp_solver=simplex_solve) -> SolveResult:
    """Solve ``model`` to integer optimality.

    Nodes are explored best bound first (deeper nodes first on equal bounds);
    the branching variable is the most fractional integer variable, lowest
    index on ties.  ``separator`` is called on every integral LP solution,
    and also on fractional ones when ``separate_fractional`` is set; any
    constraints it returns are added to the model for all nodes and the
    node is re-solved.  ``model`` is mutated by added cuts.

    On ``NodeLimit`` (or time limit) the best incumbent found so far is
    returned, if any.
    """
    sense = 1.0 if model.sense == "max" else -1.0
    int_idx = model.integer_indices()
    lb0, ub0 = model.bounds()
    seen_cuts = {con.key() for con in model.constraints}
    start = time.perf_counter()
    counter = itertools.count()
    stats = {"lp": 0, "nodes": 0, "cuts": 0, "iterations": 0}

    def solve_node(lb, ub, integral_check=True):
        rounds = 0
        while True:
            res = lp_solver(model, lb, ub)
            stats["lp"] += 1
            stats["iterations"] += res.iterations
            if res.status is not Status.OPTIMAL or separator is None:
                return res
            integral = not int_idx.size or _fractionality(res.x, int_idx).max() <= INT_TOL
            if not integral and not separate_fractional:
                return res
            if rounds >= max_cut_rounds and not integral:
                return res
            new = []
            for con in separator(res.x, integral):
                key = con.key()
                if key in seen_cuts:
                    continue
                seen_cuts.add(key)
                new.append(con)
            if not new:
                return res
            for con in new:
                model.add(con)
            stats["cuts"] += len(new)
            rounds += 1

    best_x = None
    best_obj = -math.inf  # in max-orientation
    heap: list = []
    heapq.heappush(heap, (-math.inf, 0, next(counter), lb0, ub0))
    status = Status.OPTIMAL
    unbounded = False
    root_bound = math.nan

    while heap:
        neg_parent, neg_depth, _, lb, ub = heapq.heappop(heap)
        parent_bound = -neg_parent
        if best_x is not None and parent_bound <= best_obj + _gap_tol(best_obj):
            continue
        if stats["nodes"] >= node_limit or (
                time_limit is not None and time.perf_counter() - start > time_limit):
            status = Status.NODE_LIMIT
            heapq.heappush(heap, (neg_parent, neg_depth, next(counter), lb, ub))
            break
        stats["nodes"] += 1
        res = solve_node(lb, ub)
        if res.status is Status.UNBOUNDED:
            unbounded = True
            break
        if res.status is not Status.OPTIMAL:
            continue
        bound = sense * res.objective
        if stats["nodes"] == 1:
            root_bound = res.objective
        if best_x is not None and bound <= best_obj + _gap_tol(best_obj):
            continue
        x = res.x
        if int_idx.size:
            frac = _fractionality(x, int_idx)
            worst = frac.max()
        else:
            worst = 0.0
        if worst <= INT_TOL:
            xr = x.copy()
            if int_idx.size:
                xr[int_idx] = np.round(xr[int_idx])
            obj = sense * model.evaluate(xr)
            if best_x is None or obj > best_obj + _gap_tol(best_obj):
                best_x, best_obj = xr, obj
                log.debug("incumbent %.6g at node %d", sense * obj, stats["nodes"])
            continue
        # most fractional, lowest index on ties (argmax returns the first max)
        score = np.abs(frac - 0.5)
        k = int(int_idx[int(np.argmin(score))])
        v = x[k]
        depth = -neg_depth + 1
        down_ub = ub.copy()
        down_ub[k] = math.floor(v)
        up_lb = lb.copy()
        up_lb[k] = math.ceil(v)
        heapq.heappush(heap, (-bound, -depth, next(counter), lb, down_ub))
        heapq.heappush(heap, (-bound, -depth, next(counter), up_lb, ub))

    open_bounds = [-h[0] for h in heap if math.isfinite(h[0])]
    info = {"elapsed": time.perf_counter() - start, "root_bound": root_bound}
    common = dict(node_count=stats["nodes"], lp_count=stats["lp"],
                  iterations=stats["iterations"], cuts_added=stats["cuts"], info=info)
    if unbounded:
        return SolveResult(Status.UNBOUNDED, **common)
    if best_x is None:
        if status is Status.NODE_LIMIT:
            return SolveResult(Status.NODE_LIMIT, **common)
        return SolveResult(Status.INFEASIBLE, **common)
    bound = max(open_bounds + [best_obj]) if status is Status.NODE_LIMIT else best_obj
    return SolveResult(status, x=best_x, objective=model.evaluate(best_x),
                       bound=sense * bound, **common)


def _gap_tol(obj: float) -> float:
    return 1e-9 * max(1.0, abs(obj))


def brute_force(model: LinearModel) -> SolveResult:
    """Enumerate every integer point of a pure-integer model (testing oracle)."""
    lb, ub = model.bounds()
    if any(not v.integer for v in model.variables):
        raise ValueError("brute_force needs a pure integer model")
    ranges = [range(int(math.ceil(lo)), int(math.floor(hi)) + 1) for lo, hi in zip(lb, ub)]
    sense = 1.0 if model.sense == "max" else -1.0
    best, best_x = -math.inf, None
    for point in itertools.product(*ranges):
        x = np.array(point, dtype=float)
        if any(con.violation(x) > 1e-9 for con in model.constraints):
            continue
        obj = sense * model.evaluate(x)
        if obj > best:
            best, best_x = obj, x
    if best_x is None:
        return SolveResult(Status.INFEASIBLE)
    return SolveResult(Status.OPTIMAL, x=best_x, objective=model.evaluate(best_x))
