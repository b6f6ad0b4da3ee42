"""Small builders shared by several test modules."""

from tempfair.milp import LinearModel


def binary_model(c, A, b, sense: str = "max") -> LinearModel:
    """``sense c x  s.t.  A x <= b`` over binaries."""
    m = LinearModel("binary")
    xs = [m.add_binary() for _ in range(len(c))]
    for i, row in enumerate(A):
        m.add_constraint({xs[j]: row[j] for j in range(len(c)) if row[j]}, "<=", b[i])
    m.set_objective({xs[j]: c[j] for j in range(len(c))}, sense)
    return m
