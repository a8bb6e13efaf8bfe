"""Standard-form LP data and rank preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10
ACTIVE_TOL = 1e-5


class InfeasibleError(ValueError):
    """Raised when preprocessing proves the constraints inconsistent."""


class RankError(np.linalg.LinAlgError):
    """Raised when ``A`` lacks full row rank where it is required."""


@dataclass(frozen=True)
class StandardLP:
    """``min c'x  s.t.  Ax = b, x >= 0`` together with its dual.

    ``obj_offset`` carries constants removed during standardization so that
    ``c @ x + obj_offset`` equals the objective of the source model.
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    row_names: Optional[tuple[str, ...]] = None
    col_names: Optional[tuple[str, ...]] = None
    name: str = ""
    obj_offset: float = 0.0

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        m, n = A.shape
        if b.size != m or c.size != n:
            raise ValueError(f"inconsistent shapes: A {A.shape}, b {b.shape}, c {c.shape}")
        if m > n:
            raise ValueError(f"need m <= n, got m={m}, n={n}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("problem data must be finite")
        for arr in (A, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if self.row_names is not None:
            object.__setattr__(self, "row_names", tuple(self.row_names))
        if self.col_names is not None:
            object.__setattr__(self, "col_names", tuple(self.col_names))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.obj_offset

    def shifted(self, lam: np.ndarray) -> "StandardLP":
        """The perturbed pair in shifted variables ``p = x + lam``, ``q = s + lam``.

        Returns ``(A, b + A lam, c + lam)``; solving it and subtracting
        ``lam`` recovers a solution of the perturbed problem.
        """
        lam = np.broadcast_to(np.asarray(lam, dtype=float), (self.n,))
        return StandardLP(self.A, self.b + self.A @ lam, self.c + lam,
                          self.row_names, self.col_names, self.name)


class InstanceKind(str, Enum):
    FEASIBLE_POINT = "TS1"
    DEGENERATE_SOLUTION = "TS2"


@dataclass(frozen=True)
class GeneratedInstance:
    lp: StandardLP
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    kind: InstanceKind
    seed: int
    density: float


class LabelSource(str, Enum):
    SIMPLEX = "simplex"
    IPM = "ipm"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class ActiveSetLabel:
    """Sorted 0-based column indices labelled as active."""

    indices: tuple[int, ...]
    source: LabelSource
    x: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in self.indices)))

    def as_set(self) -> frozenset[int]:
        return frozenset(self.indices)


def rank_tolerance(A: np.ndarray) -> float:
    norm = np.linalg.norm(A, 2) if A.size else 0.0
    return RANK_TOL * max(norm, 1.0)


def ensure_full_rank(lp: StandardLP) -> StandardLP:
    """Drop linearly dependent rows of ``A``.

    The rank comes from a column-pivoted QR of ``A'``. Rows are then kept
    greedily in index order, so the earliest independent rows survive and
    keep their original order. A dropped row whose right-hand side is not the matching
    combination of the retained ones raises :class:`InfeasibleError`.
    An input that already has full row rank is returned as is.
    """
    A, b = lp.A, lp.b
    m = lp.m
    if m == 0:
        return lp
    _, R, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > rank_tolerance(A)))
    if rank == m:
        return lp

    tol = rank_tolerance(A)
    Q = np.zeros((A.shape[1], rank))
    kept: list[int] = []
    for i in range(m):
        if len(kept) == rank:
            break
        v = A[i].copy()
        r = len(kept)
        for _ in range(2):
            v -= Q[:, :r] @ (Q[:, :r].T @ v)
        nv = np.linalg.norm(v)
        if nv > tol:
            Q[:, r] = v / nv
            kept.append(i)
    if len(kept) < rank:
        # greedy scan missed a borderline row; fall back to the QR pivots
        kept = sorted(piv[:rank].tolist())
    keep = np.array(kept, dtype=int)
    drop = np.setdiff1d(np.arange(m), keep)
    A_keep, b_keep = A[keep], b[keep]
    # express every dropped row in terms of the kept ones: A_keep' z = a_i
    Z, *_ = scipy.linalg.lstsq(A_keep.T, A[drop].T)
    predicted = Z.T @ b_keep
    scale = 1.0 + np.abs(b).max()
    for i, bi, pi in zip(drop, b[drop], predicted):
        if abs(bi - pi) > 1e-8 * scale:
            label = lp.row_names[i] if lp.row_names else f"#{i}"
            raise InfeasibleError(
                f"row {label} is a combination of other rows but its "
                f"right-hand side {bi:g} differs from the implied {pi:g}")

    names = tuple(lp.row_names[i] for i in keep) if lp.row_names else None
    return StandardLP(A_keep, b_keep, lp.c, names, lp.col_names, lp.name, lp.obj_offset)


def as_index_set(indices: Sequence[int] | np.ndarray) -> frozenset[int]:
    arr = np.asarray(indices)
    if arr.dtype == bool:
        arr = np.flatnonzero(arr)
    return frozenset(int(i) for i in arr)
