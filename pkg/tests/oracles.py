"""Independent reference implementations used by the tests.

Each oracle recomputes a quantity from its definition with the plainest
possible code (full enumeration, direct formulas) and shares no helper
with the package beyond instance accessors.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

LOWER_IS_FAIRER = {"gap", "minimax"}


def metric(name: str, values) -> float:
    v = [float(x) for x in values]
    hi, lo, tot = max(v), min(v), sum(v)
    if name == "rmm":
        return 1.0 if tot == 0 else 1.0 - (hi - lo) / tot
    if name == "qmmg":
        return -(((hi - lo) / 2.0) ** 2)
    if name == "mm":
        return 1.0 if hi <= 0 else lo / hi
    if name == "gap":
        return hi - lo
    if name == "minimax":
        return hi
    raise KeyError(name)


def canonical(name: str, raw: float) -> float:
    return -raw if name in LOWER_IS_FAIRER else raw


def discounted(history_rows, plan_rows, gamma: float = 1.0, tau: float = 1.0) -> list[float]:
    """Per-entity sum of ``gamma**age * past + tau**k * planned``."""
    n = len(plan_rows[0])
    out = [0.0] * n
    T = len(history_rows)
    for idx, row in enumerate(history_rows):
        age = T - idx
        for i in range(n):
            out[i] += gamma ** age * row[i]
    for k, row in enumerate(plan_rows):
        w = 1.0 if k == 0 else tau ** k
        for i in range(n):
            out[i] += w * row[i]
    return [max(0.0, x) for x in out]


def objective(kind: str, beta: float, metric_name: str, history_rows, qualities, utilities,
              gamma: float = 1.0, tau: float = 1.0) -> float:
    """Total objective of a plan from the formulation definitions."""
    q = sum((1.0 if k == 0 else tau ** k) * qk for k, qk in enumerate(qualities))
    if kind == "OP" or beta == 0:
        return q
    hist = history_rows if kind in ("HFOP", "DHFOP", "MSDHFOP") else []
    tot = discounted(hist, utilities, gamma, tau)
    return q + beta * canonical(metric_name, metric(metric_name, tot))


def best_plan_value(kind, beta, metric_name, history_rows, problems, gamma=1.0, tau=1.0):
    """Optimal objective over the product of every step's full candidate set."""
    best = -math.inf
    pools = [list(p.candidates()) for p in problems]
    for combo in itertools.product(*pools):
        quals = [p.quality(s) for p, s in zip(problems, combo)]
        utils = [list(p.utility_values(s)) for p, s in zip(problems, combo)]
        best = max(best, objective(kind, beta, metric_name, history_rows, quals, utils,
                                   gamma, tau))
    return best


# -- integer programs -------------------------------------------------------------

def random_binary_program(rng: np.random.Generator, n: int, m: int):
    """``max c x  s.t.  A x <= b,  x in {0,1}^n`` with a feasible origin."""
    c = rng.integers(-10, 11, size=n).astype(float)
    A = rng.integers(-5, 8, size=(m, n)).astype(float)
    b = rng.integers(0, 3 * n, size=m).astype(float)
    return c, A, b


def binary_brute(c, A, b) -> float | None:
    """Best objective over all 0/1 points, vectorized."""
    n = len(c)
    pts = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
    ok = np.all(pts @ A.T <= b + 1e-9, axis=1) if len(A) else np.ones(len(pts), bool)
    if not ok.any():
        return None
    return float((pts[ok] @ c).max())


# -- routing and assignment -------------------------------------------------------

def route_len(D, depot, route) -> float:
    stops = [depot, *route, depot]
    return sum(D[a][b] for a, b in zip(stops, stops[1:]))


def vrp_brute(coords, depot: int, n_vehicles: int, beta: float = 0.0, metric_name: str = "gap",
              offsets=None) -> float:
    """Min of ``sum L + beta * F(o + L)`` over all labeled ordered routings."""
    D = [[math.dist(p, q) for q in coords] for p in coords]
    cust = [i for i in range(len(coords)) if i != depot]
    offsets = [0.0] * n_vehicles if offsets is None else list(offsets)
    best = math.inf
    for labels in itertools.product(range(n_vehicles), repeat=len(cust)):
        if len(set(labels)) < n_vehicles:
            continue
        blocks = [[c for c, l in zip(cust, labels) if l == v] for v in range(n_vehicles)]
        per_block = [sorted({route_len(D, depot, p) for p in itertools.permutations(bl)})
                     for bl in blocks]
        for lens in itertools.product(*per_block):
            cost = sum(lens)
            if beta:
                cost += beta * metric(metric_name, [o + l for o, l in zip(offsets, lens)])
            best = min(best, cost)
    return best


def tap_brute(C, beta: float = 0.0, offsets=None) -> float:
    """Min of ``sum cost + beta * max(o + cost)`` over all permutations."""
    C = np.asarray(C, dtype=float)
    n = len(C)
    o = np.zeros(n) if offsets is None else np.asarray(offsets, dtype=float)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        costs = C[np.arange(n), perm]
        best = min(best, costs.sum() + (beta * (o + costs).max() if beta else 0.0))
    return best
