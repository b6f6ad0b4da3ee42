"""Vehicle routing from a single depot with lazily separated subtour cuts."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..milp import Constraint, LinearModel
from .base import ConstraintViolation, DomainInstance, InfeasibleError, StepIP

Route = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class VrpInstance(DomainInstance):
    """Points with coordinates, a depot index and named vehicles.

    A solution is one route per vehicle; a route lists the non-depot point
    indices in visiting order (depot start and end implied).  Every vehicle
    leaves the depot, so every route is non-empty.
    """

    coords: tuple[tuple[float, float], ...]
    depot: int = 0
    vehicles: tuple[str, ...] = ("v1",)
    distance: tuple[tuple[float, ...], ...] | None = None

    domain = "vrp"
    default_backend = "enumerate"

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(tuple(map(float, c)) for c in self.coords))
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        n = len(self.coords)
        if not 0 <= self.depot < n:
            raise ValueError("depot must index a point")
        if not self.vehicles:
            raise ValueError("need at least one vehicle")
        if self.distance is None:
            P = np.asarray(self.coords)
            D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))
        else:
            D = np.asarray(self.distance, dtype=float)
            if D.shape != (n, n):
                raise ValueError("distance must be an n x n matrix")
            if not np.allclose(D, D.T) or np.any(np.diag(D) != 0) or np.any(D < 0):
                raise ValueError("distance must be symmetric, nonnegative, zero diagonal")
        object.__setattr__(self, "distance", tuple(map(tuple, D)))

    @classmethod
    def with_vehicles(cls, coords, depot: int, n_vehicles: int, distance=None) -> "VrpInstance":
        return cls(tuple(coords), depot, tuple(f"V{k + 1}" for k in range(n_vehicles)), distance)

    @property
    def D(self) -> np.ndarray:
        return np.asarray(self.distance)

    @property
    def entities(self):
        return self.vehicles

    @property
    def customers(self) -> list[int]:
        return [i for i in range(len(self.coords)) if i != self.depot]

    def _feasible(self) -> bool:
        return len(self.customers) >= len(self.vehicles)

    def route_length(self, route: Sequence[int]) -> float:
        D = self.D
        stops = [self.depot, *route, self.depot]
        return math.fsum(D[a, b] for a, b in zip(stops, stops[1:]))

    def utility_values(self, solution) -> np.ndarray:
        return np.array([self.route_length(r) for r in solution])

    def quality(self, solution) -> float:
        return -math.fsum(self.utility_values(solution))

    def check(self, solution) -> None:
        if len(solution) != len(self.vehicles):
            raise ConstraintViolation("one route per vehicle",
                                      f"{len(solution)} routes for {len(self.vehicles)} vehicles")
        for v, r in zip(self.vehicles, solution):
            if not r:
                raise ConstraintViolation("depot departure", f"vehicle {v} never leaves the depot")
        visited = [p for r in solution for p in r]
        if sorted(visited) != self.customers:
            raise ConstraintViolation("visit every point exactly once", str(solution))

    def candidates(self) -> Iterator[tuple[Route, ...]]:
        """All ordered routings: permutations of the customers cut into one
        non-empty consecutive segment per vehicle."""
        cust = self.customers
        k = len(self.vehicles)
        if not self._feasible():
            raise InfeasibleError("fewer customers than vehicles")
        cut_sets = list(itertools.combinations(range(1, len(cust)), k - 1))
        for perm in itertools.permutations(cust):
            for cuts in cut_sets:
                bounds = (0, *cuts, len(cust))
                yield tuple(perm[bounds[i]:bounds[i + 1]] for i in range(k))

    def exact_search(self, beta: float, metric: str, offsets):
        """Partition search (see :mod:`vrp_exact`); gap and minimax only."""
        from .vrp_exact import solve_exact

        if beta and metric not in ("gap", "minimax"):
            return None
        routes, _ = solve_exact(self, beta, metric if beta else "gap", offsets)
        return routes

    def build_ip(self) -> StepIP:
        if not self._feasible():
            raise InfeasibleError("fewer customers than vehicles: depot departure is unsatisfiable")
        n = len(self.coords)
        V = len(self.vehicles)
        r = self.depot
        D = self.D
        m = LinearModel("vrp")
        arcs = [(a, b) for a in range(n) for b in range(n) if a != b]
        x = {}
        for v in range(V):
            for a, b in arcs:
                x[a, b, v] = m.add_binary(f"x_{a}_{b}_{v}")
        for v in range(V):
            for b in range(n):
                coeffs = {}
                for a in range(n):
                    if a != b:
                        coeffs[x[a, b, v]] = coeffs.get(x[a, b, v], 0.0) + 1.0
                        coeffs[x[b, a, v]] = coeffs.get(x[b, a, v], 0.0) - 1.0
                m.add_constraint(coeffs, "=", 0.0, name=f"flow_{b}_{v}")
        for b in self.customers:
            m.add_constraint({x[a, b, v]: 1.0 for a in range(n) if a != b for v in range(V)},
                             "=", 1.0, name=f"visit_{b}")
        for v in range(V):
            m.add_constraint({x[r, a, v]: 1.0 for a in self.customers}, "=", 1.0,
                             name=f"depart_{v}")
        quality = {x[a, b, v]: -D[a, b] for (a, b, v) in x}
        utilities = [{x[a, b, v]: D[a, b] for a, b in arcs} for v in range(V)]
        idx = np.array([[x[a, b, v] for v in range(V)] for a, b in arcs])

        def separator(values, integral):
            agg = np.zeros((n, n))
            for k, (a, b) in enumerate(arcs):
                agg[a, b] = values[idx[k]].sum()
            return subtour_cuts(agg, r, x, V)

        def decode(values):
            routes = []
            for v in range(V):
                succ = {}
                for a, b in arcs:
                    if values[x[a, b, v]] > 0.5:
                        succ[a] = b
                route = []
                cur = succ.get(r)
                while cur is not None and cur != r and len(route) <= n:
                    route.append(cur)
                    cur = succ.get(cur)
                routes.append(tuple(route))
            return tuple(routes)

        return StepIP(m, quality, utilities, decode, separator=separator,
                      separate_fractional=True, extra={"x": x})


def subtour_cuts(flow: np.ndarray, depot: int, x: dict, n_vehicles: int,
                 tol: float = 1e-6) -> list[Constraint]:
    """Cuts ``sum_{a in S, b not in S, v} x[a,b,v] >= 1`` for every connected
    component ``S`` of the support graph that misses the depot and has
    outflow below 1."""
    n = flow.shape[0]
    sym = (flow + flow.T) > tol
    seen = [False] * n
    cuts = []
    for start in range(n):
        if seen[start] or start == depot:
            continue
        comp, stack = [], [start]
        seen[start] = True
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in np.flatnonzero(sym[a]):
                if not seen[b]:
                    seen[b] = True
                    stack.append(int(b))
        if depot in comp or len(comp) < 2:
            continue
        S = set(comp)
        out = sum(flow[a, b] for a in S for b in range(n) if b not in S)
        if out < 1.0 - tol:
            coeffs = tuple(sorted((x[a, b, v], 1.0) for a in S for b in range(n)
                                  if b not in S for v in range(n_vehicles)))
            cuts.append(Constraint(coeffs, ">=", 1.0, name="subtour_" + "_".join(map(str, sorted(S)))))
    return cuts
