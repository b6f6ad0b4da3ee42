"""Weekly nurse scheduling with morning/evening shifts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .base import Candidate, ConstraintViolation, DomainInstance

SHIFT_KINDS = ("m", "e")


def shift_names(days: int = 5) -> tuple[str, ...]:
    return tuple(f"d{d + 1}{k}" for d in range(days) for k in SHIFT_KINDS)


@dataclass(frozen=True, eq=False)
class NspInstance(DomainInstance):
    """Nurses, seniority and per-shift preferences in ``{0, 1, 2, 3}``.

    Shifts are ordered day by day, morning before evening.  A solution is a
    tuple with the nurse index staffing each shift.  Feasible schedules put
    exactly one nurse on every shift and at most one shift per nurse per day.
    """

    nurses: tuple[str, ...]
    seniority: tuple[float, ...]
    preference: tuple[tuple[int, ...], ...]
    q_max: float = 15.0
    days: int = 5

    domain = "nsp"
    default_backend = "enumerate"

    def __post_init__(self):
        object.__setattr__(self, "nurses", tuple(self.nurses))
        object.__setattr__(self, "seniority", tuple(float(s) for s in self.seniority))
        object.__setattr__(self, "preference", tuple(tuple(int(p) for p in row) for row in self.preference))
        n_shifts = 2 * self.days
        if self.days != 5:
            raise ValueError("schedules cover exactly 5 days (10 shifts)")
        if len(self.nurses) < 2:
            raise ValueError("need at least two nurses to staff morning and evening")
        if len(self.seniority) != len(self.nurses):
            raise ValueError("one seniority per nurse")
        if len(self.preference) != len(self.nurses) or any(len(r) != n_shifts for r in self.preference):
            raise ValueError(f"preference must be nurses x {n_shifts}")
        if any(p not in (0, 1, 2, 3) for r in self.preference for p in r):
            raise ValueError("preferences must lie in {0, 1, 2, 3}")
        if not self.q_max > 0:
            raise ValueError("q_max must be positive")

    @property
    def entities(self):
        return self.nurses

    @property
    def shifts(self) -> tuple[str, ...]:
        return shift_names(self.days)

    def day_options(self) -> list[tuple[int, int]]:
        """(morning nurse, evening nurse) pairs, distinct nurses, lexicographic."""
        n = len(self.nurses)
        return [(a, b) for a in range(n) for b in range(n) if a != b]

    def candidates(self) -> Iterator[tuple[int, ...]]:
        for days in itertools.product(self.day_options(), repeat=self.days):
            yield tuple(i for pair in days for i in pair)

    def quality(self, solution) -> float:
        sen = self.seniority
        return sum(sen[solution[2 * d + 1]] for d in range(self.days)) / self.q_max

    def utility_values(self, solution) -> np.ndarray:
        u = np.zeros(len(self.nurses))
        for s, nurse in enumerate(solution):
            u[nurse] += self.preference[nurse][s]
        return u

    def check(self, solution) -> None:
        if len(solution) != 2 * self.days:
            raise ConstraintViolation("one nurse per shift", f"{len(solution)} entries")
        for s, nurse in enumerate(solution):
            if not 0 <= int(nurse) < len(self.nurses):
                raise ConstraintViolation("one nurse per shift", f"shift {s}: unknown nurse {nurse}")
        for d in range(self.days):
            if solution[2 * d] == solution[2 * d + 1]:
                raise ConstraintViolation("one shift per nurse per day",
                                          f"day {d + 1}: nurse {self.nurses[solution[2 * d]]}")

    def distinct_candidates(self) -> list[Candidate]:
        """Day-by-day dynamic program over (utilities, evening seniority).

        Equivalent to deduplicating the full ``(n(n-1))**5`` stream but keeps
        only one lexicographically smallest partial schedule per state.
        """
        cached = getattr(self, "_distinct_cache", None)
        if cached is not None:
            return cached
        n = len(self.nurses)
        pref = self.preference
        sen = self.seniority
        options = self.day_options()
        states: dict[tuple, tuple[int, ...]] = {((0,) * n, 0.0): ()}
        for d in range(self.days):
            moves = []
            for a, b in options:
                delta = [0] * n
                delta[a] += pref[a][2 * d]
                delta[b] += pref[b][2 * d + 1]
                moves.append(((a, b), tuple(delta), sen[b]))
            nxt: dict[tuple, tuple[int, ...]] = {}
            for (util, q), prefix in states.items():
                for pair, delta, s in moves:
                    key = (tuple(u + du for u, du in zip(util, delta)), q + s)
                    sched = prefix + pair
                    old = nxt.get(key)
                    if old is None or sched < old:
                        nxt[key] = sched
            states = nxt
        out = [Candidate(sched, q / self.q_max, np.array(util, dtype=float))
               for (util, q), sched in states.items()]
        out.sort(key=lambda c: c.solution)
        object.__setattr__(self, "_distinct_cache", out)
        return out


#: Seniority and weekly preference table of the five-nurse example.
EXAMPLE_SENIORITY = (3.0, 2.0, 1.0, 0.0, 0.0)
EXAMPLE_PREFERENCE = {  # (morning, evening) utility, identical every day
    "n1": (3, 0),
    "n2": (3, 1),
    "n3": (3, 2),
    "n4": (0, 3),
    "n5": (1, 3),
}


def example_instance() -> NspInstance:
    nurses = tuple(EXAMPLE_PREFERENCE)
    pref = tuple(EXAMPLE_PREFERENCE[n] * 5 for n in nurses)
    return NspInstance(nurses, EXAMPLE_SENIORITY, pref, q_max=15.0)
