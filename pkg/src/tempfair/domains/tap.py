"""Task allocation: a square agent x task cost matrix, one task per agent."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..milp import LinearModel
from .base import ConstraintViolation, DomainInstance, StepIP


@dataclass(frozen=True, eq=False)
class TapInstance(DomainInstance):
    """``cost[a][t]`` is what agent ``a`` pays for task ``t``.

    A solution is a tuple ``assignment`` with ``assignment[a]`` the task
    index given to agent ``a``.
    """

    agents: tuple[str, ...]
    tasks: tuple[str, ...]
    cost: tuple[tuple[float, ...], ...]

    domain = "tap"
    default_backend = "milp"

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "cost", tuple(tuple(float(c) for c in row) for row in self.cost))
        if len(self.agents) != len(self.tasks):
            raise ValueError(f"need |agents| == |tasks|, got {len(self.agents)} and {len(self.tasks)}")
        if not self.agents:
            raise ValueError("need at least one agent")
        if len(self.cost) != len(self.agents) or any(len(r) != len(self.tasks) for r in self.cost):
            raise ValueError("cost must be an agents x tasks matrix")
        if any(c < 0 for row in self.cost for c in row):
            raise ValueError("costs must be >= 0")

    @classmethod
    def from_matrix(cls, cost) -> "TapInstance":
        cost = np.asarray(cost, dtype=float)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
        n = cost.shape[0]
        return cls(tuple(f"a{i + 1}" for i in range(n)), tuple(f"t{j + 1}" for j in range(n)),
                   tuple(map(tuple, cost)))

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def entities(self):
        return self.agents

    @property
    def C(self) -> np.ndarray:
        return np.asarray(self.cost)

    def candidates(self):
        return itertools.permutations(range(self.n))

    def utility_values(self, solution) -> np.ndarray:
        C = self.C
        return C[np.arange(self.n), np.asarray(solution, dtype=int)]

    def total_cost(self, solution) -> float:
        return float(self.utility_values(solution).sum())

    def quality(self, solution) -> float:
        return -self.total_cost(solution)

    def check(self, solution) -> None:
        if len(solution) != self.n:
            raise ConstraintViolation("one task per agent", f"{len(solution)} entries for {self.n} agents")
        if sorted(int(t) for t in solution) != list(range(self.n)):
            raise ConstraintViolation("each task assigned exactly once", str(tuple(solution)))

    def exact_search(self, beta: float, metric: str, offsets):
        """Threshold sweep for ``-sum cost - beta * max(offset + cost)``."""
        if beta and metric != "minimax":
            return None
        if not beta:
            return hungarian(self.C)[0]
        return minimax_assignment(self.C, beta, offsets)[0]

    def build_ip(self) -> StepIP:
        n = self.n
        m = LinearModel("tap")
        x = [[m.add_binary(f"x_{a}_{t}") for t in range(n)] for a in range(n)]
        for t in range(n):
            m.add_constraint({x[a][t]: 1.0 for a in range(n)}, "=", 1.0, name=f"task_{t}")
        for a in range(n):
            m.add_constraint({x[a][t]: 1.0 for t in range(n)}, "=", 1.0, name=f"agent_{a}")
        C = self.C
        quality = {x[a][t]: -C[a, t] for a in range(n) for t in range(n) if C[a, t]}
        utilities = [{x[a][t]: C[a, t] for t in range(n) if C[a, t]} for a in range(n)]

        def decode(values):
            sol = []
            for a in range(n):
                row = [values[x[a][t]] for t in range(n)]
                sol.append(int(np.argmax(row)))
            return tuple(sol)

        return StepIP(m, quality, utilities, decode)


def hungarian(cost) -> tuple[tuple[int, ...], float]:
    """Minimum-cost perfect assignment (shortest augmenting paths, O(n^3)).

    Returns ``(assignment, total)`` with ``assignment[row] = column``.
    """
    C = np.asarray(cost, dtype=float)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError("cost matrix must be square")
    # 1-based potentials, p[j] = row matched to column j
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = np.full(n + 1, np.inf)
            cur[1:] = C[i0 - 1] - u[i0] - v[1:]
            upd = free & (cur < minv)
            minv[upd] = cur[upd]
            way[upd] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))  # first minimum, as a left-to-right scan
            delta = cand[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assignment = [0] * n
    for j in range(1, n + 1):
        if p[j]:
            assignment[p[j] - 1] = j - 1
    total = float(sum(C[i, assignment[i]] for i in range(n)))
    return tuple(assignment), total


def minimax_assignment(cost, beta: float, offsets=None):
    """Exact minimizer of ``sum_a c[a, s(a)] + beta * max_a (o_a + c[a, s(a)])``.

    For each candidate value ``t`` of the maximum, the cheapest assignment
    that avoids entries with ``o_a + c > t`` is a min-sum assignment with
    those entries forbidden.  Returns ``(assignment, objective)``.
    """
    C = np.asarray(cost, dtype=float)
    n = C.shape[0]
    o = np.zeros(n) if offsets is None else np.asarray(offsets, dtype=float)
    level = o[:, None] + C
    big = float(C.sum() + 1.0) * (n + 1)
    # the max is at least every agent's cheapest reachable level
    floor = level.min(axis=1).max()
    best, best_val = None, math.inf
    for t in np.unique(level[level >= floor]):
        if best is not None and beta * t >= best_val:
            break
        masked = np.where(level <= t, C, big)
        assignment, total = hungarian(masked)
        if total >= big:
            continue
        realized = level[np.arange(n), assignment].max()
        val = total + beta * realized
        if best is None or val < best_val - 1e-9 * max(1.0, abs(best_val)):
            best, best_val = assignment, val
    return best, best_val


def tap_hungarian(instance: TapInstance):
    return hungarian(instance.C)
