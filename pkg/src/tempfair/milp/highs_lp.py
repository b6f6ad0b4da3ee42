"""LP relaxations through HiGHS (``scipy.optimize.linprog``).

A drop-in ``lp_solver`` for :func:`branch_and_bound` on models too large
for the dense tableau, e.g. multi-step assignment plans with thousands of
binaries.  Branching, cuts and incumbents stay in the package's own code.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, vstack

from .model import LinearModel, NumericalError, SolveResult, Status


def _sparse(constraints, n: int):
    data, rows, cols = [], [], []
    lo, hi = [], []
    for i, con in enumerate(constraints):
        for j, c in con.coeffs:
            rows.append(i)
            cols.append(j)
            data.append(c)
        lo.append(-np.inf if con.sense == "<=" else con.rhs)
        hi.append(np.inf if con.sense == ">=" else con.rhs)
    A = csr_matrix((data, (rows, cols)), shape=(len(lo), n))
    return A, np.array(lo), np.array(hi)


class _Cache:
    """Sparse rows of a model, rebuilt only when constraints were added."""

    def __init__(self):
        self.key = None
        self.value = None

    def get(self, model: LinearModel):
        key = (id(model), len(model.constraints))
        if key != self.key:
            self.value = _sparse(model.constraints, model.n_vars)
            self.key = key
        return self.value


_cache = _Cache()


def highs_solve(model: LinearModel, lb=None, ub=None, extra=(), **_ignored) -> SolveResult:
    """Solve the LP relaxation of ``model`` with the HiGHS dual simplex."""
    dlb, dub = model.bounds()
    lb = dlb if lb is None else np.asarray(lb, dtype=float)
    ub = dub if ub is None else np.asarray(ub, dtype=float)
    if np.any(lb > ub + 1e-12):
        return SolveResult(Status.INFEASIBLE, lp_count=1)
    A, lo, hi = _cache.get(model)
    if extra:
        A2, lo2, hi2 = _sparse(extra, model.n_vars)
        A, lo, hi = vstack([A, A2]).tocsr(), np.concatenate([lo, lo2]), np.concatenate([hi, hi2])
    c = model.objective_vector()
    if model.sense == "max":
        c = -c
    eq = lo == hi
    le = ~eq
    A_ub = [A[le & np.isfinite(hi)], -A[le & np.isfinite(lo)]]
    b_ub = np.concatenate([hi[le & np.isfinite(hi)], -lo[le & np.isfinite(lo)]])
    res = linprog(c, A_ub=vstack(A_ub).tocsr() if b_ub.size else None,
                  b_ub=b_ub if b_ub.size else None,
                  A_eq=A[eq] if eq.any() else None, b_eq=lo[eq] if eq.any() else None,
                  bounds=np.column_stack([lb, ub]), method="highs-ds")
    iters = int(getattr(res, "nit", 0) or 0)
    if res.status == 2:
        return SolveResult(Status.INFEASIBLE, lp_count=1, iterations=iters)
    if res.status == 3:
        return SolveResult(Status.UNBOUNDED, lp_count=1, iterations=iters)
    if res.status != 0:
        raise NumericalError(f"HiGHS failed: {res.message}")
    x = np.clip(res.x, lb, ub)
    return SolveResult(Status.OPTIMAL, x=x, objective=model.evaluate(x), lp_count=1,
                       iterations=iters)


def highs_milp(model: LinearModel, separator=None, *, time_limit: float | None = None,
               max_rounds: int = 200, **_ignored) -> SolveResult:
    """Integer optimum via the HiGHS MILP solver.

    Lazy constraints are handled by re-solving: every integral optimum is
    passed to ``separator`` and the returned cuts are added until none is
    violated.  ``model`` is mutated by added cuts.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    lb, ub = model.bounds()
    integrality = np.array([1 if v.integer else 0 for v in model.variables])
    sign = -1.0 if model.sense == "max" else 1.0
    seen = {con.key() for con in model.constraints}
    options = {} if time_limit is None else {"time_limit": float(time_limit)}
    cuts = 0
    for rounds in range(1, max_rounds + 1):
        A, lo, hi = _cache.get(model)
        res = milp(sign * model.objective_vector(), integrality=integrality,
                   bounds=Bounds(lb, ub),
                   constraints=LinearConstraint(A, lo, hi) if A.shape[0] else (),
                   options=options)
        if res.status == 2 or res.x is None and res.status == 0:
            return SolveResult(Status.INFEASIBLE, lp_count=rounds, cuts_added=cuts)
        if res.status == 3:
            return SolveResult(Status.UNBOUNDED, lp_count=rounds, cuts_added=cuts)
        if res.x is None:
            return SolveResult(Status.NODE_LIMIT, lp_count=rounds, cuts_added=cuts,
                               info={"message": res.message})
        x = np.clip(res.x, lb, ub)
        x[integrality == 1] = np.round(x[integrality == 1])
        new = []
        if separator is not None:
            for con in separator(x, True):
                if con.key() not in seen:
                    seen.add(con.key())
                    new.append(con)
        if not new:
            status = Status.OPTIMAL if res.status == 0 else Status.NODE_LIMIT
            return SolveResult(status, x=x, objective=model.evaluate(x), lp_count=rounds,
                               node_count=int(getattr(res, "mip_node_count", 0) or 0),
                               cuts_added=cuts, bound=sign * getattr(res, "mip_dual_bound", np.nan),
                               info={"message": res.message})
        for con in new:
            model.add(con)
        cuts += len(new)
    raise NumericalError("lazy constraint rounds exhausted")
