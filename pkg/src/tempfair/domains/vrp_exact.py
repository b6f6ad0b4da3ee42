"""Exact combinatorial search for single-step VRP objectives.

Without capacities a vehicle's route only depends on its customer subset
and visiting order, so every routing is a labeled partition of the
customers plus one achievable route length per block.  For objectives

    maximize  -sum_v L_v + beta * F(o + L)

with ``F`` the (negated) max-min gap or minimax cost and ``o`` per-vehicle
history offsets, the best lengths for a fixed partition follow from a sweep
over the candidate minimum.  Partitions are enumerated depth first with a
bound built from per-subset shortest tours.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .base import InfeasibleError
from .vrp import VrpInstance

GAP = "gap"
MINIMAX = "minimax"


class RouteTable:
    """All achievable closed-route lengths for every customer subset up to
    ``max_size`` customers, keyed by bitmask over ``instance.customers``."""

    def __init__(self, instance: VrpInstance, max_size: int):
        self.instance = instance
        self.cust = instance.customers
        D = instance.D
        r = instance.depot
        n = len(self.cust)
        self.n = n
        self.max_size = max_size
        paths: dict[tuple[int, int], np.ndarray] = {}
        for i, c in enumerate(self.cust):
            paths[1 << i, i] = np.array([D[r, c]])
        by_size: list[list[int]] = [[] for _ in range(max_size + 1)]
        for mask in range(1, 1 << n):
            k = bin(mask).count("1")
            if k <= max_size:
                by_size[k].append(mask)
        for k in range(2, max_size + 1):
            for mask in by_size[k]:
                for j in range(n):
                    if not mask >> j & 1:
                        continue
                    prev = mask & ~(1 << j)
                    cj = self.cust[j]
                    parts = [paths[prev, i] + D[self.cust[i], cj]
                             for i in range(n) if prev >> i & 1]
                    paths[mask, j] = np.concatenate(parts)
        self.lengths: dict[int, np.ndarray] = {}
        self.shortest = np.full(1 << n, math.inf)
        for k in range(1, max_size + 1):
            for mask in by_size[k]:
                ends = [paths[mask, j] + D[self.cust[j], r] for j in range(n) if mask >> j & 1]
                vals = np.unique(np.concatenate(ends))
                self.lengths[mask] = vals
                self.shortest[mask] = vals[0]

    def members(self, mask: int) -> list[int]:
        return [c for i, c in enumerate(self.cust) if mask >> i & 1]

    def route_with_length(self, mask: int, length: float) -> tuple[int, ...]:
        """First visiting order (lexicographic) whose length matches."""
        inst = self.instance
        best, best_err = None, math.inf
        for perm in itertools.permutations(self.members(mask)):
            err = abs(inst.route_length(perm) - length)
            if err <= 1e-9 * max(1.0, length):
                return perm
            if err < best_err:
                best, best_err = perm, err
        return best


def _min_partition_cost(table: RouteTable, n_blocks: int) -> np.ndarray:
    """``out[k][mask]``: least total shortest-tour length splitting ``mask``
    into ``k`` nonempty blocks (``inf`` if impossible)."""
    full = 1 << table.n
    out = np.full((n_blocks + 1, full), math.inf)
    out[0, 0] = 0.0
    short = table.shortest
    for k in range(1, n_blocks + 1):
        for mask in range(1, full):
            low = mask & -mask
            rest = mask & ~low
            best = math.inf
            sub = rest
            while True:
                block = sub | low
                v = short[block] + out[k - 1, mask & ~block]
                if v < best:
                    best = v
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            out[k, mask] = best
    return out


def _best_lengths(lists, offsets, beta: float, metric: str):
    """Optimal per-vehicle lengths for fixed blocks; returns (cost, lengths)."""
    V = len(lists)
    if metric == MINIMAX or beta == 0:
        lens = [lst[0] for lst in lists]
        cost = math.fsum(lens)
        if beta:
            cost += beta * max(o + l for o, l in zip(offsets, lens))
        return cost, lens
    best_cost, best = math.inf, None
    for v in range(V):
        thresholds = offsets[v] + lists[v]
        total = lists[v].copy()
        top = thresholds.copy()
        ok = np.ones(len(thresholds), dtype=bool)
        picks = []
        for w in range(V):
            if w == v:
                picks.append(None)
                continue
            lw = lists[w]
            idx = np.searchsorted(lw, thresholds - offsets[w], side="left")
            ok &= idx < len(lw)
            idx = np.minimum(idx, len(lw) - 1)
            chosen = lw[idx]
            picks.append(idx)
            total = total + chosen
            top = np.maximum(top, offsets[w] + chosen)
        cost = total + beta * (top - thresholds)
        cost[~ok] = math.inf
        k = int(np.argmin(cost))
        if _improves(cost[k], best_cost):
            best_cost = float(cost[k])
            best = [lists[v][k] if w == v else lists[w][picks[w][k]] for w in range(V)]
    return best_cost, best


def solve_exact(instance: VrpInstance, beta: float = 0.0, metric: str = GAP,
                offsets=None) -> tuple[tuple[tuple[int, ...], ...], float]:
    """Routing maximizing ``-sum L + beta * F`` exactly.

    Returns ``(routes, cost)`` where ``cost = sum L + beta * unfairness``.
    """
    V = len(instance.vehicles)
    n = len(instance.customers)
    if n < V:
        raise InfeasibleError("fewer customers than vehicles")
    offsets = np.zeros(V) if offsets is None else np.asarray(offsets, dtype=float)
    if offsets.shape != (V,):
        raise ValueError("one offset per vehicle")
    table = RouteTable(instance, n - V + 1)
    lower = _min_partition_cost(table, V)
    full = (1 << n) - 1
    symmetric = bool(np.all(offsets == offsets[0]))
    # search vehicles by increasing offset; blocks are stored in that order
    order = [int(v) for v in np.argsort(offsets, kind="stable")]
    off = offsets[order]
    short = table.shortest
    lengths = table.lengths
    longest = np.full(1 << n, math.inf)
    for mask, vals in lengths.items():
        longest[mask] = vals[-1]
    single = np.full(1 << n, math.inf)  # any route within mask is at least this long
    for mask in range(1, 1 << n):
        low = mask & -mask
        single[mask] = min(short[low], single[mask & ~low])
    state = {"cost": math.inf, "blocks": None, "lens": None}

    def finish(blocks):
        lists = [lengths[b] for b in blocks]
        cost, lens = _best_lengths(lists, off, beta, metric)
        if _improves(cost, state["cost"]):
            state.update(cost=cost, blocks=list(blocks), lens=lens)

    def fair_bound(blocks, rest):
        if not beta:
            return 0.0
        k = len(blocks)
        lo = max([off[v] + short[b] for v, b in enumerate(blocks)] +
                 [off[w] + single[rest] for w in range(k, V)])
        if metric == MINIMAX:
            return beta * lo
        hi = min([off[v] + longest[b] for v, b in enumerate(blocks)] +
                 [off[w] + longest[rest] for w in range(k, V)])
        return beta * max(0.0, lo - hi)

    def rec(blocks, used, partial):
        k = len(blocks)
        rest = full & ~used
        remaining = V - k
        if remaining == 1:
            if rest and bin(rest).count("1") <= table.max_size:
                finish(blocks + [rest])
            return
        if symmetric:
            low = rest & -rest
            cands = [s | low for s in _submasks(rest & ~low)]
        else:
            cands = [s for s in _submasks(rest) if s]
        for block in cands:
            left = rest & ~block
            if bin(left).count("1") < remaining - 1 or bin(block).count("1") > table.max_size:
                continue
            p = partial + short[block]
            nb = blocks + [block]
            if p + lower[remaining - 1, left] + fair_bound(nb, left) >= state["cost"]:
                continue
            rec(nb, used | block, p)

    if beta:
        # seed with the shortest-total partition under every vehicle labeling
        seed, _ = solve_exact(instance)
        masks = [sum(1 << table.cust.index(c) for c in r) for r in seed]
        for perm in itertools.permutations(masks):
            finish(list(perm))
    rec([], 0, 0.0)
    if state["blocks"] is None:
        raise InfeasibleError("no routing found")
    routes = [None] * V
    for pos, v in enumerate(order):
        routes[v] = table.route_with_length(state["blocks"][pos], state["lens"][pos])
    return tuple(routes), state["cost"]


def _improves(new: float, old: float) -> bool:
    if math.isinf(old):
        return not math.isinf(new)
    return new < old - 1e-9 * max(1.0, abs(old))


def _submasks(mask: int) -> list[int]:
    out = []
    sub = mask
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    out.reverse()
    return out
