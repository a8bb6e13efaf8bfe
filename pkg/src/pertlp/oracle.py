"""Reference active sets used to score predictions."""

from __future__ import annotations

import enum

import numpy as np

from .crossover import SimplexStatus, build_basis, revised_simplex
from .ipm import SolveOptions, SolveStatus, solve
from .problem import ACTIVE_TOL, ActiveSetLabel, LabelSource, StandardLP


class Oracle(str, enum.Enum):
    SIMPLEX = "simplex"
    IPM = "ipm"


class SolverStatusError(RuntimeError):
    """The oracle solver did not reach an optimal solution."""


def oracle_solution(lp: StandardLP, oracle: Oracle | str) -> np.ndarray:
    """Optimal primal ``x`` from the named solver.

    The simplex oracle starts from the basis of the first independent
    columns; the interior point oracle runs the unperturbed method until the
    relative residual drops below ``1e-8``.
    """
    oracle = Oracle(oracle)
    if oracle is Oracle.SIMPLEX:
        res = revised_simplex(lp, build_basis(lp, ()))
        if res.status is not SimplexStatus.OPTIMAL:
            raise SolverStatusError(f"simplex oracle ended with status {res.status.value}")
        return res.x
    trace = solve(lp, SolveOptions(relres_tol=1e-8).unperturbed())
    if trace.status is not SolveStatus.RELRES:
        raise SolverStatusError(f"interior point oracle ended with status {trace.status.value}"
                                + (f": {trace.message}" if trace.message else ""))
    return trace.final.x


def actual_active_set(lp: StandardLP, oracle: Oracle | str = Oracle.SIMPLEX,
                      tol: float = ACTIVE_TOL) -> ActiveSetLabel:
    """Indices with ``x*_i < tol`` at the oracle's optimal solution."""
    oracle = Oracle(oracle)
    x = oracle_solution(lp, oracle)
    source = LabelSource.SIMPLEX if oracle is Oracle.SIMPLEX else LabelSource.IPM
    return ActiveSetLabel(tuple(np.flatnonzero(x < tol).tolist()), source, x)
