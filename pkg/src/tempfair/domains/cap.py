"""Course assignment: lecturers take full or half loads of each course."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .base import ConstraintViolation, DomainInstance, InfeasibleError

Load = tuple[float, ...]  # per-lecturer load of one course


@dataclass(frozen=True, eq=False)
class CapInstance(DomainInstance):
    """One semester of the course assignment problem.

    ``skill[i][c]`` is lecturer ``i``'s expertise in course ``c``.  A
    solution is a tuple with one entry per course, each entry the
    per-lecturer loads of that course (values in ``{0, 0.5, 1}`` summing
    to 1).
    """

    lecturers: tuple[str, ...]
    courses: tuple[str, ...]
    skill: tuple[tuple[float, ...], ...]
    q_max: float = 1.0
    unavailable: frozenset = frozenset()

    domain = "cap"
    default_backend = "enumerate"

    def __post_init__(self):
        object.__setattr__(self, "lecturers", tuple(self.lecturers))
        object.__setattr__(self, "courses", tuple(self.courses))
        object.__setattr__(self, "skill", tuple(tuple(float(s) for s in row) for row in self.skill))
        object.__setattr__(self, "unavailable", frozenset(self.unavailable))
        if not self.lecturers:
            raise ValueError("need at least one lecturer")
        if len(self.skill) != len(self.lecturers) or any(
                len(row) != len(self.courses) for row in self.skill):
            raise ValueError("skill must be a lecturers x courses matrix")
        if any(s < 0 for row in self.skill for s in row):
            raise ValueError("skills must be >= 0")
        if not self.q_max > 0:
            raise ValueError("q_max must be positive")
        unknown = self.unavailable - set(self.lecturers)
        if unknown:
            raise ValueError(f"unknown unavailable lecturers: {sorted(unknown)}")

    @classmethod
    def uniform(cls, skills, n_courses: int, q_max: float = 1.0, unavailable=(),
                lecturers=None) -> "CapInstance":
        """Every lecturer has the same skill in every course."""
        lecturers = tuple(lecturers or (f"l{i + 1}" for i in range(len(skills))))
        courses = tuple(f"c{j + 1}" for j in range(n_courses))
        return cls(lecturers, courses, tuple((float(s),) * n_courses for s in skills),
                   q_max, frozenset(unavailable))

    def with_unavailable(self, unavailable) -> "CapInstance":
        return CapInstance(self.lecturers, self.courses, self.skill, self.q_max,
                           frozenset(unavailable))

    @property
    def entities(self) -> tuple[str, ...]:
        return self.lecturers

    def _available(self) -> list[int]:
        return [i for i, l in enumerate(self.lecturers) if l not in self.unavailable]

    def course_options(self) -> list[Load]:
        """Per-course loads in canonical order: full loads by lecturer index,
        then half/half pairs in lexicographic index order."""
        n = len(self.lecturers)
        avail = self._available()
        opts = []
        for i in avail:
            load = [0.0] * n
            load[i] = 1.0
            opts.append(tuple(load))
        for i, j in itertools.combinations(avail, 2):
            load = [0.0] * n
            load[i] = load[j] = 0.5
            opts.append(tuple(load))
        return opts

    def candidates(self) -> Iterator[tuple[Load, ...]]:
        opts = self.course_options()
        if not opts and self.courses:
            raise InfeasibleError("every lecturer is unavailable")
        return itertools.product(opts, repeat=len(self.courses))

    def loads(self, solution) -> np.ndarray:
        """Lecturer x course load matrix."""
        return np.array(solution, dtype=float).reshape(len(self.courses), len(self.lecturers)).T

    def quality(self, solution) -> float:
        x = self.loads(solution)
        return float(np.sum(x * np.asarray(self.skill))) / self.q_max

    def utility_values(self, solution) -> np.ndarray:
        return self.loads(solution).sum(axis=1)

    def check(self, solution) -> None:
        if len(solution) != len(self.courses):
            raise ConstraintViolation("one load vector per course",
                                      f"got {len(solution)} for {len(self.courses)} courses")
        for c, load in zip(self.courses, solution):
            if len(load) != len(self.lecturers):
                raise ConstraintViolation("load per lecturer", f"course {c}")
            if any(v not in (0.0, 0.5, 1.0) for v in load):
                raise ConstraintViolation("loads in {0, 0.5, 1}", f"course {c}: {load}")
            if abs(sum(load) - 1.0) > 1e-12:
                raise ConstraintViolation("course load sums to 1", f"course {c}: {load}")
            for l, v in zip(self.lecturers, load):
                if v and l in self.unavailable:
                    raise ConstraintViolation("unavailable lecturer", f"{l} on course {c}")


def assignment_from_loads(instance: CapInstance, per_lecturer: dict[str, float]):
    """Canonical-first solution whose lecturer totals equal ``per_lecturer``.

    Handy for stating plans as ``x_(m, n)`` the way the running example does.
    """
    target = np.array([per_lecturer.get(l, 0.0) for l in instance.lecturers])
    for sol in instance.candidates():
        if np.allclose(instance.utility_values(sol), target):
            return sol
    raise InfeasibleError(f"no assignment realizes loads {per_lecturer}")
