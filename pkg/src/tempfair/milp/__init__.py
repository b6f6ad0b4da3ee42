"""Self-contained integer programming: simplex LP relaxations, branch and
bound with lazy constraints, and fairness linearizations."""

from .branch_bound import branch_and_bound, brute_force
from .highs_lp import highs_milp, highs_solve
from .linearize import linearize_gap, linearize_minimax
from .model import (Constraint, LinearModel, NumericalError, SolveResult, Status,
                    Variable)
from .simplex import simplex_solve

__all__ = [
    "Constraint", "LinearModel", "NumericalError", "SolveResult", "Status", "Variable",
    "simplex_solve", "branch_and_bound", "brute_force", "linearize_gap", "linearize_minimax",
    "highs_solve", "highs_milp",
]
