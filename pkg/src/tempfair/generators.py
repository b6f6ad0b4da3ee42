"""Seeded instance and history generators.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so a
seed reproduces the same output on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains.tap import TapInstance, hungarian
from .domains.vrp import VrpInstance
from .fairness import History, UtilityVector

VRP_GRID = 21
VRP_POINTS = 11  # customers; with the depot the instance has 12 locations
VRP_VEHICLES = 4


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_vrp(grid_size: int = VRP_GRID, n_points: int = VRP_POINTS, seed=0,
            n_vehicles: int = VRP_VEHICLES) -> VrpInstance:
    """Depot at the grid center plus ``n_points`` distinct random grid cells.

    The depot is point 0; customers follow in sampling order.
    """
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    if not 0 < n_points <= grid_size ** 2 - 1:
        raise ValueError(f"n_points must lie in [1, {grid_size ** 2 - 1}] for grid {grid_size}")
    rng = _rng(seed)
    c = grid_size // 2
    depot_cell = c * grid_size + c
    cells = np.delete(np.arange(grid_size ** 2), depot_cell)
    picked = rng.choice(cells, size=n_points, replace=False)
    coords = [(c, c)] + [(int(k) // grid_size, int(k) % grid_size) for k in picked]
    return VrpInstance.with_vehicles(coords, 0, n_vehicles)


def gen_vrp_history(k_steps: int = 5, grid_size: int = VRP_GRID, n_points: int = VRP_POINTS,
                    n_vehicles: int = VRP_VEHICLES, seed=0, **bb_options) -> History:
    """Solve OP on ``k_steps`` random instances; the shortest route of each
    step goes to V1, the second shortest to V2 and so on."""
    from .objective import FormulationSpec, solve

    if k_steps < 1:
        raise ValueError("k_steps must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(k_steps)
    spec = FormulationSpec.make("OP")
    steps = []
    for s in seeds:
        inst = gen_vrp(grid_size, n_points, s, n_vehicles)
        res = solve(spec, None, inst, "milp", **bb_options)
        lengths = np.sort(np.asarray(res.per_step_utilities[0].values))
        steps.append(UtilityVector(inst.vehicles, tuple(lengths)))
    return History(tuple(steps))


def gen_tap(n: int = 40, constrained=(), seed=0) -> TapInstance:
    """Per agent: one cost-5 task, three cost-20 tasks, the rest cost 30.

    Constrained agents (indices) get cost 30 in place of their cost-5 task.
    """
    constrained = set(int(a) for a in constrained)
    if len(constrained) > n or any(not 0 <= a < n for a in constrained):
        raise ValueError("constrained agents must be distinct indices below n")
    if n < 4:
        raise ValueError("n must be >= 4 (one cost-5 and three cost-20 tasks per agent)")
    rng = _rng(seed)
    C = np.full((n, n), 30.0)
    for a in range(n):
        pos = rng.choice(n, size=4, replace=False)
        if a not in constrained:
            C[a, pos[0]] = 5.0
        C[a, pos[1:]] = 20.0
    return TapInstance.from_matrix(C)


HISTORY_STEPS = 6


@dataclass(frozen=True)
class TapRun:
    instances: tuple[TapInstance, ...]
    history: History
    C: tuple[int, ...]
    W: tuple[int, ...]


def gen_tap_run(seed=0, n: int = 40, n_constrained: int = 8) -> TapRun:
    """Three unconstrained and three constrained instances plus the
    synthetic history that singles out the four agents ``W``.

    The history is six identical past steps whose per-agent totals are
    180 (``W``), 30 (the 24 cheapest other agents) and 120 (the rest).
    """
    rng = _rng(seed)
    C = tuple(sorted(int(a) for a in rng.choice(n, size=n_constrained, replace=False)))
    child = rng.integers(0, 2 ** 63, size=6)
    instances = tuple(gen_tap(n, () if k < 3 else C, int(child[k])) for k in range(6))
    totals = np.zeros(n)
    for inst in instances:
        assignment, _ = hungarian(inst.C)
        totals += inst.C[np.arange(n), assignment]
    order = np.argsort(totals, kind="stable")
    free = [int(a) for a in order if a not in C]
    W = tuple(sorted(free[-4:]))
    rest = [int(a) for a in order if int(a) not in W]
    # per-step costs of six identical past instances: 6 x 30 = 180 for W,
    # 6 x 5 = 30 for the first 24 of the rest, 6 x 20 = 120 for the others
    step = np.empty(n)
    step[list(W)] = 30.0
    step[rest[:24]] = 5.0
    step[rest[24:]] = 20.0
    past = UtilityVector(instances[0].agents, tuple(step))
    return TapRun(instances, History((past,) * HISTORY_STEPS), C, W)


NSP_STAIRCASE = (0.0,) * 5 + (0.5,) * 5 + (1.0,) * 5


def gen_nsp_histories(seed=0, u_max: float = 15.0,
                      nurses=("n1", "n2", "n3", "n4", "n5")) -> tuple[History, History]:
    """Two 15-week histories with opposite fairness trends.

    Week utilities are ``(u_min, m, m, m, u_max)`` with ``u_min = F * u_max``
    and ``m`` the midpoint, so each week's maximin ratio is exactly ``F``.
    H1 follows the rising staircase of ``F`` values, H2 the same weeks
    reversed.  ``seed`` is accepted for interface symmetry; the
    construction is deterministic.
    """
    if len(nurses) < 2:
        raise ValueError("need at least two nurses")
    steps = []
    for f in NSP_STAIRCASE:
        lo = f * u_max
        mid = (lo + u_max) / 2
        vals = (lo,) + (mid,) * (len(nurses) - 2) + (u_max,)
        steps.append(UtilityVector(tuple(nurses), vals))
    h1 = History(tuple(steps))
    return h1, h1.reversed()
