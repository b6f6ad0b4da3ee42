"""Epigraph linearizations of max / max-min fairness terms."""

from __future__ import annotations

from typing import Mapping, Sequence

from .model import INF, LinearModel

Expr = Mapping[int, float]


def _check(exprs, offsets):
    if not exprs:
        raise ValueError("need at least one utility expression")
    if offsets is None:
        offsets = [0.0] * len(exprs)
    if len(offsets) != len(exprs):
        raise ValueError("one offset per utility expression")
    return list(offsets)


def linearize_minimax(model: LinearModel, utility_expressions: Sequence[Expr],
                      offsets: Sequence[float] | None = None,
                      name: str = "M") -> tuple[LinearModel, int]:
    """Return a copy of ``model`` with ``M >= offset_e + U_e`` for every entity.

    Minimizing ``M`` (maximizing ``-M``) makes it equal to the largest
    offset-shifted utility at the optimum.
    """
    offsets = _check(utility_expressions, offsets)
    out = model.copy()
    M = out.add_var(name, 0.0, INF)
    for e, (expr, off) in enumerate(zip(utility_expressions, offsets)):
        coeffs = {j: -c for j, c in expr.items()}
        coeffs[M] = coeffs.get(M, 0.0) + 1.0
        out.add_constraint(coeffs, ">=", float(off), name=f"{name}_ge_{e}")
    return out, M


def linearize_gap(model: LinearModel, utility_expressions: Sequence[Expr],
                  offsets: Sequence[float] | None = None,
                  names: tuple[str, str] = ("M", "m")) -> tuple[LinearModel, int, int]:
    """Return a copy with ``M >= offset_e + U_e >= m`` for every entity.

    ``M - m`` is the max-min gap once ``M`` is pushed down and ``m`` up by
    the objective.  ``m`` is bounded below by 0 since utilities are nonnegative.
    """
    offsets = _check(utility_expressions, offsets)
    out, M = linearize_minimax(model, utility_expressions, offsets, name=names[0])
    m = out.add_var(names[1], 0.0, INF)
    for e, (expr, off) in enumerate(zip(utility_expressions, offsets)):
        coeffs = {j: -c for j, c in expr.items()}
        coeffs[m] = coeffs.get(m, 0.0) + 1.0
        out.add_constraint(coeffs, "<=", float(off), name=f"{names[1]}_le_{e}")
    return out, M, m
