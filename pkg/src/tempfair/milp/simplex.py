"""Dense bounded-variable primal simplex (two phase).

Upper bounds are handled implicitly by complementing variables
(``x = u - x_bar``) instead of adding rows, so branching only changes bounds
and the tableau stays ``rows x (vars + slacks)``.
"""

from __future__ import annotations

import math

import numpy as np

from .model import INF, LinearModel, NumericalError, SolveResult, Status

FEAS_TOL = 1e-6
_DJ_TOL = 1e-9
_PIV_TOL = 1e-9
_BLAND_AFTER = 40  # consecutive degenerate pivots before switching to Bland


class _Unbounded(Exception):
    pass


class _Tableau:
    def __init__(self, T, basis, upper, flipped, bland_only=False, piv_tol=_PIV_TOL):
        self.T = T
        self.basis = basis
        self.upper = upper
        self.flipped = flipped
        self.m = T.shape[0] - 1
        self.bland_only = bland_only
        self.piv_tol = piv_tol
        self.iterations = 0

    def complement_nonbasic(self, k):
        T = self.T
        u = self.upper[k]
        col = T[:, k].copy()
        T[:, -1] -= u * col
        T[:, k] = -col
        self.flipped[k] = not self.flipped[k]

    def complement_basic(self, r):
        T = self.T
        k = self.basis[r]
        T[r, :-1] *= -1.0
        T[r, k] = 1.0
        T[r, -1] = self.upper[k] - T[r, -1]
        self.flipped[k] = not self.flipped[k]

    def pivot(self, r, e):
        T = self.T
        prow = T[r] / T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            T[nz] -= np.outer(col[nz], prow)
        T[r] = prow
        T[nz, e] = 0.0
        self.basis[r] = e
        self.iterations += 1

    def run(self, allowed, max_iter):
        """Maximize the objective row; ``allowed`` masks entering columns."""
        T, m = self.T, self.m
        degenerate = 0
        is_basic = np.zeros(T.shape[1] - 1, dtype=bool)
        is_basic[self.basis] = True
        for _ in range(max_iter):
            d = T[m, :-1]
            cand = allowed & ~is_basic & (d > _DJ_TOL)
            if not cand.any():
                return
            bland = self.bland_only or degenerate >= _BLAND_AFTER
            if bland:
                e = int(np.flatnonzero(cand)[0])
            else:
                e = int(np.argmax(np.where(cand, d, -np.inf)))
            col = T[:m, e]
            beta = T[:m, -1]
            ub_b = self.upper[self.basis]
            theta = np.full(m, INF)
            pos = col > self.piv_tol
            theta[pos] = np.maximum(beta[pos], 0.0) / col[pos]
            neg = (col < -self.piv_tol) & np.isfinite(ub_b)
            theta[neg] = np.maximum(ub_b[neg] - beta[neg], 0.0) / (-col[neg])
            tmin = theta.min() if m else INF
            u_e = self.upper[e]
            if u_e <= tmin:
                if u_e == INF:
                    raise _Unbounded()
                self.complement_nonbasic(e)
                degenerate = 0 if u_e > 0 else degenerate + 1
                continue
            ties = np.flatnonzero(theta <= tmin + 1e-12)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            if col[r] < 0:
                self.complement_basic(r)
            leaving = self.basis[r]
            self.pivot(r, e)
            is_basic[leaving] = False
            is_basic[e] = True
            degenerate = degenerate + 1 if tmin <= 1e-12 else 0
        raise NumericalError(f"simplex iteration limit ({max_iter}) reached")


def _standard_form(model: LinearModel, lb, ub, extra=()):
    """Shift/complement variables to ``[0, u]`` and build equality rows.

    Returns the pieces needed by :func:`simplex_solve` plus the mapping
    back to the original variables.
    """
    n = model.n_vars
    # column map: x_j = shift_j + sign_j * y_col_j (- y_neg_j for free vars)
    sign = np.ones(n)
    shift = np.zeros(n)
    yub = np.zeros(n)
    free = []
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if lo > -INF:
            shift[j] = lo
            yub[j] = hi - lo
        elif hi < INF:
            sign[j] = -1.0
            shift[j] = hi
            yub[j] = INF
        else:
            yub[j] = INF
            free.append(j)
    A, b, senses = model.dense_rows(list(model.constraints) + list(extra))
    b = b - A @ shift
    A = A * sign
    c = model.objective_vector() * sign
    const = model.objective_constant + float(model.objective_vector() @ shift)
    if model.sense == "min":
        c = -c
        const = -const
    if free:
        A = np.hstack([A, -A[:, free]])
        c = np.concatenate([c, -c[free]])
        yub = np.concatenate([yub, np.full(len(free), INF)])
    return A, b, senses, c, const, yub, sign, shift, free


def simplex_solve(model: LinearModel, lb=None, ub=None, extra=(),
                  bland_only: bool = False, max_iter: int | None = None) -> SolveResult:
    """Solve the LP relaxation of ``model`` (integrality ignored).

    ``lb``/``ub`` override the declared variable bounds and ``extra`` adds
    constraints for this solve only; both are how branch-and-bound expresses
    its nodes.  Retries once with pure Bland pivoting and a looser pivot
    tolerance before giving up with :class:`NumericalError`.
    """
    if lb is None or ub is None:
        dlb, dub = model.bounds()
        lb = dlb if lb is None else np.asarray(lb, dtype=float)
        ub = dub if ub is None else np.asarray(ub, dtype=float)
    if np.any(lb > ub + 1e-12):
        return SolveResult(Status.INFEASIBLE, lp_count=1)
    ub = np.maximum(ub, lb)
    attempts = [(bland_only, _PIV_TOL)] if bland_only else [(False, _PIV_TOL), (True, 1e-7)]
    last_error = None
    for bland, piv_tol in attempts:
        try:
            res = _solve_once(model, lb, ub, extra, bland, piv_tol, max_iter)
        except NumericalError as exc:
            last_error = exc
            continue
        if res.status is not Status.OPTIMAL:
            return res
        viol = model.max_violation(res.x, lb, ub)
        for con in extra:
            viol = max(viol, con.violation(res.x) / max(1.0, abs(con.rhs)))
        if viol <= FEAS_TOL:
            return res
        last_error = NumericalError(f"LP solution violates constraints by {viol:.3g}")
    raise last_error


def _solve_once(model, lb, ub, extra, bland, piv_tol, max_iter) -> SolveResult:
    A, b, senses, c, const, yub, sign, shift, free = _standard_form(model, lb, ub, extra)
    m, n = A.shape
    # slacks
    n_slack = sum(1 for s in senses if s != "=")
    cols = n + n_slack
    S = np.zeros((m, n_slack))
    k = 0
    slack_of_row = [-1] * m
    for i, s in enumerate(senses):
        if s == "<=":
            S[i, k] = 1.0
        elif s == ">=":
            S[i, k] = -1.0
        else:
            continue
        slack_of_row[i] = n + k
        k += 1
    M = np.hstack([A, S])
    neg = b < 0
    M[neg] *= -1.0
    b = np.where(neg, -b, b)
    upper = np.concatenate([yub, np.full(n_slack, INF)])

    basis = []
    art_rows = []
    for i in range(m):
        sj = slack_of_row[i]
        if sj >= 0 and M[i, sj] > 0:
            basis.append(sj)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    total = cols + n_art
    T = np.zeros((m + 1, total + 1))
    T[:m, :cols] = M
    T[:m, -1] = b
    for a, i in enumerate(art_rows):
        T[i, cols + a] = 1.0
        basis[i] = cols + a
    upper = np.concatenate([upper, np.full(n_art, INF)])
    basis = np.array(basis, dtype=int)
    flipped = np.zeros(total, dtype=bool)
    tab = _Tableau(T, basis, upper, flipped, bland_only=bland, piv_tol=piv_tol)
    limit = max_iter or 50 * (m + total) + 1000

    if n_art:
        # phase 1: maximize -sum(artificials)
        T[m, :] = T[art_rows, :].sum(axis=0)
        T[m, cols:total] = 0.0
        allowed = np.ones(total, dtype=bool)
        allowed[cols:] = False
        try:
            tab.run(allowed, limit)
        except _Unbounded:  # pragma: no cover - phase 1 is bounded
            raise NumericalError("phase 1 reported unbounded")
        infeas = T[m, -1]
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return SolveResult(Status.INFEASIBLE, lp_count=1, iterations=tab.iterations)
        # drive artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if basis[r] >= cols:
                row = T[r, :cols]
                cand = np.flatnonzero(np.abs(row) > 1e-9)
                if cand.size:
                    e = int(cand[np.argmax(np.abs(row[cand]))])
                    tab.pivot(r, e)
                else:
                    keep[r] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = T[rows][:, list(range(cols)) + [total]]
        basis = basis[keep]
        upper = upper[:cols]
        flipped = flipped[:cols]
        m = T.shape[0] - 1
        T[:m, -1] = np.clip(T[:m, -1], 0.0, None)
        tab = _Tableau(T, basis, upper, flipped, bland_only=bland, piv_tol=piv_tol)
        tab.iterations = 0

    # phase 2 objective row
    cfull = np.concatenate([c, np.zeros(n_slack)])
    ceff = np.where(tab.flipped, -cfull, cfull)
    z0 = const + float(np.sum(cfull[tab.flipped] * upper[tab.flipped]))
    cb = ceff[tab.basis]
    T = tab.T
    T[m, :-1] = ceff - cb @ T[:m, :-1]
    T[m, -1] = -(z0 + cb @ T[:m, -1])
    T[m, tab.basis] = 0.0
    try:
        tab.run(np.ones(T.shape[1] - 1, dtype=bool), limit)
    except _Unbounded:
        return SolveResult(Status.UNBOUNDED, lp_count=1, iterations=tab.iterations)

    y = np.zeros(T.shape[1] - 1)
    y[tab.basis] = T[:m, -1]
    y = np.where(tab.flipped, upper - y, y)
    ystruct = y[:n]
    nstd = len(sign)
    x = shift + sign * ystruct[:nstd]
    if free:
        x[free] -= ystruct[nstd:]
    obj = model.evaluate(x)
    return SolveResult(Status.OPTIMAL, x=x, objective=obj, lp_count=1,
                       iterations=tab.iterations)
