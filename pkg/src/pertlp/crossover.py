"""Simplex warm start from a predicted active set.

Contains the basis construction from a prediction, a dense revised primal
simplex method that can start from any nonsingular basis, and the two
comparison metrics used in the crossover experiments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.linalg

from .problem import StandardLP, rank_tolerance


@dataclass(frozen=True)
class Basis:
    """Ordered basic column indices (0-based)."""

    columns: tuple[int, ...]
    _factor: object = field(default=None, compare=False, repr=False)

    def as_set(self) -> frozenset[int]:
        return frozenset(self.columns)

    def factor(self, A: np.ndarray):
        """LU factors of ``A[:, columns]`` (computed on first use)."""
        if self._factor is None:
            object.__setattr__(self, "_factor", scipy.linalg.lu_factor(A[:, list(self.columns)]))
        return self._factor

    def sorted(self) -> list[int]:
        return sorted(self.columns)


def build_basis(lp: StandardLP, predicted_active: Iterable[int], s: Optional[np.ndarray] = None) -> Basis:
    """Basis made of independent columns, predicted-inactive ones first.

    Columns outside ``predicted_active`` are scanned in increasing index
    order; if they do not span the column space, predicted-active columns are
    added in increasing order of ``s`` (ties by index). A column is kept when
    its component orthogonal to the columns already chosen has norm above
    ``1e-10 * max(||A||, 1)``.
    """
    A = lp.A
    m, n = A.shape
    active = frozenset(int(i) for i in predicted_active)
    if any(i < 0 or i >= n for i in active):
        raise IndexError("predicted active index out of range")
    inactive = [j for j in range(n) if j not in active]
    if s is None:
        s = np.zeros(n)
    s = np.asarray(s, dtype=float)
    rest = sorted(active, key=lambda j: (s[j], j))
    tol = rank_tolerance(A)

    Q = np.zeros((m, m))
    chosen: list[int] = []
    for j in inactive + rest:
        if len(chosen) == m:
            break
        v = A[:, j].copy()
        r = len(chosen)
        for _ in range(2):
            v -= Q[:, :r] @ (Q[:, :r].T @ v)
        nv = np.linalg.norm(v)
        if nv > tol:
            Q[:, r] = v / nv
            chosen.append(j)
    if len(chosen) < m:
        raise RuntimeError(f"columns span only rank {len(chosen)} < m = {m}")
    return Basis(tuple(chosen))


class SimplexStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    ITER_LIMIT = "iter_limit"
    FAILED = "failed"


@dataclass(frozen=True)
class SimplexResult:
    status: SimplexStatus
    iterations: int
    objective: float
    x: np.ndarray
    basis: Basis
    phase1_iterations: int = 0


def revised_simplex(lp: StandardLP, start: Basis, iter_limit: int = 50_000, *,
                    opt_tol: float = 1e-9, feas_tol: float = 1e-9,
                    pivot_tol: float = 1e-9) -> SimplexResult:
    """Primal revised simplex with Dantzig pricing.

    If the starting basic solution has negative components, a composite
    phase 1 first minimizes their total infeasibility (the ratio test walks
    past breakpoints while the objective keeps decreasing). After ``5m``
    consecutive degenerate pivots the entering and leaving choices switch to
    smallest-index rules until a nondegenerate pivot occurs, and the basic
    values are shifted by small positive amounts (a right-hand-side
    perturbation) to break the degenerate vertex. The shift is removed once
    the perturbed problem is optimal and the simplex continues from that
    basis with the original data. The basis is refactorized every iteration.
    ``iterations`` counts pivots of both phases.
    """
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    basis = list(start.columns)
    if len(basis) != m or len(set(basis)) != m:
        raise ValueError("start basis must list m distinct columns")
    feas = feas_tol * (1.0 + np.linalg.norm(b))
    iterations = 0
    phase1_iters = 0
    degenerate_run = 0
    bland = False
    b_work = b
    perturbed = False
    perturb_count = 0
    rng = np.random.default_rng(m * 7919 + n)

    def result(status, x_b, basis):
        x = np.zeros(n)
        x[basis] = x_b
        return SimplexResult(status, iterations, lp.objective(x), x, Basis(tuple(basis)), phase1_iters)

    while True:
        try:
            lu = scipy.linalg.lu_factor(A[:, basis], check_finite=False)
        except (ValueError, np.linalg.LinAlgError):
            return result(SimplexStatus.FAILED, np.zeros(m), basis)
        if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * max(1.0, np.abs(lu[0]).max()):
            return result(SimplexStatus.FAILED, np.zeros(m), basis)
        x_b = scipy.linalg.lu_solve(lu, b_work, check_finite=False)
        infeasible = x_b < -feas
        phase1 = bool(infeasible.any())
        cost_b = -infeasible.astype(float) if phase1 else c[basis]
        pi = scipy.linalg.lu_solve(lu, cost_b, trans=1, check_finite=False)
        d = (0.0 if phase1 else c) - A.T @ pi
        d[basis] = 0.0

        if bland:
            cands = np.flatnonzero(d < -opt_tol)
            q = int(cands[0]) if cands.size else -1
        else:
            q = int(np.argmin(d))
            if d[q] >= -opt_tol:
                q = -1
        if q < 0:
            if perturbed:
                b_work, perturbed = b, False
                continue
            if phase1:
                return result(SimplexStatus.INFEASIBLE, x_b, basis)
            return result(SimplexStatus.OPTIMAL, x_b, basis)
        if iterations >= iter_limit:
            return result(SimplexStatus.ITER_LIMIT, x_b, basis)

        w = scipy.linalg.lu_solve(lu, A[:, q], check_finite=False)
        if phase1:
            r, theta = _phase1_ratio(x_b, w, infeasible, d[q], pivot_tol, basis, bland)
        else:
            r, theta = _phase2_ratio(x_b, w, pivot_tol, basis, bland)
        if r < 0:
            if phase1:
                return result(SimplexStatus.FAILED, x_b, basis)
            return result(SimplexStatus.UNBOUNDED, x_b, basis)

        if theta * abs(d[q]) <= 1e-12 * (1.0 + abs(float(cost_b @ x_b))):
            degenerate_run += 1
            if degenerate_run > 5 * m:
                bland = True
                if not perturbed and perturb_count < 3:
                    shift = 1e-7 * (1.0 + np.abs(x_b).max()) * (1.0 + rng.random(m))
                    b_work = b_work + A[:, basis] @ shift
                    perturbed = True
                    perturb_count += 1
        else:
            degenerate_run = 0
            bland = False
        basis[r] = q
        iterations += 1
        if phase1:
            phase1_iters += 1


def _tie_break(rows: np.ndarray, basis: list[int], bland: bool) -> int:
    if rows.size == 1 or not bland:
        return int(rows[0])
    return int(min(rows, key=lambda i: basis[i]))


def _phase2_ratio(x_b, w, pivot_tol, basis, bland):
    rows = np.flatnonzero(w > pivot_tol)
    if rows.size == 0:
        return -1, math.inf
    ratios = np.maximum(x_b[rows], 0.0) / w[rows]
    theta = float(ratios.min())
    ties = rows[ratios <= theta + 1e-12 * max(1.0, theta)]
    return _tie_break(ties, basis, bland), theta


def _phase1_ratio(x_b, w, infeasible, slope, pivot_tol, basis, bland):
    # blocking by currently feasible basics that would turn negative
    feas_rows = np.flatnonzero(~infeasible & (w > pivot_tol))
    if feas_rows.size:
        ratios = np.maximum(x_b[feas_rows], 0.0) / w[feas_rows]
        limit = float(ratios.min())
        ties = feas_rows[ratios <= limit + 1e-12 * max(1.0, limit)]
        block = _tie_break(ties, basis, bland)
    else:
        limit, block = math.inf, -1
    # breakpoints where infeasible basics reach zero
    bp_rows = np.flatnonzero(infeasible & (w < -pivot_tol))
    bps = x_b[bp_rows] / w[bp_rows]
    order = np.lexsort((bp_rows, bps))
    for idx in order:
        t = float(bps[idx])
        if t >= limit:
            break
        slope += -w[bp_rows[idx]]
        if slope >= 0:
            return int(bp_rows[idx]), t
    if block < 0 and order.size:
        # rounding left the slope slightly negative past the last breakpoint
        last = order[-1]
        return int(bp_rows[last]), float(bps[last])
    return block, limit


def basis_relative_difference(b1: Basis | Iterable[int], b2: Basis | Iterable[int]) -> float:
    """``|B1 xor B2| / |B1 | B2|`` (0 for two empty sets)."""
    s1 = b1.as_set() if isinstance(b1, Basis) else frozenset(b1)
    s2 = b2.as_set() if isinstance(b2, Basis) else frozenset(b2)
    union = s1 | s2
    if not union:
        return 0.0
    return len(s1 ^ s2) / len(union)


def relative_iteration_count(iter_perturbed: int, iter_unperturbed: int) -> float:
    """``-log2(iter_perturbed / iter_unperturbed)``.

    Equal counts (including two zeros) give 0; a zero unperturbed count with
    a positive perturbed one gives ``-inf``, and the reverse gives ``+inf``.
    """
    if iter_perturbed < 0 or iter_unperturbed < 0:
        raise ValueError("iteration counts must be nonnegative")
    if iter_perturbed == iter_unperturbed:
        return 0.0
    if iter_unperturbed == 0:
        return -math.inf
    if iter_perturbed == 0:
        return math.inf
    return -math.log2(iter_perturbed / iter_unperturbed)
