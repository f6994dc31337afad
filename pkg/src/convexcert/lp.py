"""Thin wrapper around HiGHS (via scipy) with the toolkit's tolerances."""
import numpy as np
from scipy.optimize import linprog

_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(0, None), method="highs"):
    """Solve ``min c'z`` and return the scipy result.

    ``res.status`` is 0 (optimal), 2 (infeasible) or 3 (unbounded); anything
    else raises ``RuntimeError`` because the toolkit never poses such LPs.
    """
    res = linprog(
        np.asarray(c, dtype=float),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=bounds,
        method=method,
        options=dict(_OPTIONS),
    )
    if res.status not in (0, 2, 3):
        raise RuntimeError(f"LP solver failed: {res.message}")
    return res
