"""Thin deterministic wrapper around scipy's HiGHS linear-programming solver.

Maximizes c @ x subject to a_ub @ x <= b_ub, a_eq @ x == b_eq and per-variable
bounds. Feasibility tolerances are pinned at 1e-9 so results are reproducible
across runs and machines with the same scipy build.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog


class NumericalInstability(RuntimeError):
    """Solver reported numerical trouble even after a perturbed retry."""


class UnboundedProblem(ValueError):
    """Objective unbounded; the caller forgot a bounding box."""


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float | None


_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


def lp_solve(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    bounds=None,
) -> LpSolution:
    """Maximize c @ x. bounds is a list of (lo, hi) pairs (None = free side)."""
    c = np.asarray(c, dtype=float)
    res = linprog(
        -c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds,
        method="highs",
        options=_OPTIONS,
    )
    if res.status == 4:
        # one deterministic retry with microscopically loosened rows
        if b_ub is not None:
            b_ub = np.asarray(b_ub, dtype=float) + 1e-11 * (1.0 + np.abs(np.asarray(b_ub, dtype=float)))
        res = linprog(
            -c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=bounds,
            method="highs",
            options=_OPTIONS,
        )
    if res.status == 0:
        return LpSolution("optimal", np.asarray(res.x, dtype=float), float(-res.fun))
    if res.status == 2:
        return LpSolution("infeasible", None, None)
    if res.status == 3:
        raise UnboundedProblem("LP is unbounded; add a bounding box")
    raise NumericalInstability(f"LP solver failed: {res.message}")
