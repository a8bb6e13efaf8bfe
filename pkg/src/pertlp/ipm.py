"""Infeasible primal-dual path-following method with controlled perturbations.

The primal bound ``x >= 0`` is relaxed to ``x >= -lam`` and the dual bound
``s >= 0`` to ``s >= -phi``. The perturbations shrink as the iterates settle,
and with ``lam = phi = 0`` the method is the plain path-following scheme.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .activity import DEFAULT_CUTOFF, ActivityPartition
from .problem import RankError, StandardLP

TRACE_COLUMNS = ("k", "mu_lambda", "relres", "alpha_p", "alpha_d", "n_active",
                 "n_inactive", "n_undetermined", "max_lambda", "max_phi")


class IllConditionedError(np.linalg.LinAlgError):
    """The Newton system could not be solved to the required accuracy."""

    def __init__(self, iteration: int, message: str):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


@dataclass(frozen=True)
class Iterate:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class PerturbationState:
    """Primal and dual shifts with their shrink parameters."""

    lam: np.ndarray
    phi: np.ndarray
    eta: float = 1.0
    zeta: float = 0.5

    def __post_init__(self):
        if np.any(self.lam < 0) or np.any(self.phi < 0):
            raise ValueError("perturbations must be nonnegative")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must lie in (0, 1), got {self.zeta}")

    @classmethod
    def uniform(cls, n: int, value: float, phi_value: Optional[float] = None,
                eta: float = 1.0, zeta: float = 0.5) -> "PerturbationState":
        phi_value = value if phi_value is None else phi_value
        return cls(np.full(n, float(value)), np.full(n, float(phi_value)), eta, zeta)

    @classmethod
    def zero(cls, n: int) -> "PerturbationState":
        return cls.uniform(n, 0.0)


def default_sigma(mu: float) -> float:
    return min(0.1, 100.0 * mu)


@dataclass(frozen=True)
class SolveOptions:
    """Parameters of :func:`solve`.

    Stopping: ``iter_exact`` runs exactly that many iterations and cannot be
    combined with the other rules. Otherwise the run stops at the first
    iteration where ``mu_lambda < mu_cap`` or ``relres < relres_tol`` (each
    rule is off when ``None``), or after ``max_iters`` iterations.

    ``lambda0`` and ``phi0`` are the initial perturbations (scalars or
    vectors; ``phi0=None`` copies ``lambda0``). ``shrink=False`` keeps them
    fixed, which solves one perturbed problem.
    """

    sigma_rule: Callable[[float], float] = default_sigma
    step_fraction: float = 0.9995
    max_iters: int = 100
    mu_cap: Optional[float] = None
    relres_tol: Optional[float] = 1e-8
    iter_exact: Optional[int] = None
    lambda0: object = 1e-2
    phi0: object = None
    eta: float = 1.0
    zeta: float = 0.5
    shrink: bool = True
    cutoff: float = DEFAULT_CUTOFF
    newton_tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.iter_exact is not None:
            if self.mu_cap is not None or self.relres_tol is not None:
                raise ValueError("iter_exact excludes mu_cap and relres_tol")
            if self.iter_exact < 0:
                raise ValueError("iter_exact must be nonnegative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must lie in (0, 1), got {self.zeta}")
        for name in ("lambda0", "phi0"):
            v = getattr(self, name)
            if v is not None and np.any(np.asarray(v, dtype=float) < 0):
                raise ValueError(f"{name} must be nonnegative")

    def unperturbed(self) -> "SolveOptions":
        return replace(self, lambda0=0.0, phi0=0.0)

    def exactly(self, iterations: int) -> "SolveOptions":
        return replace(self, iter_exact=iterations, mu_cap=None, relres_tol=None)

    def initial_perturbation(self, n: int) -> PerturbationState:
        lam = np.broadcast_to(np.asarray(self.lambda0, dtype=float), (n,)).copy()
        phi0 = self.lambda0 if self.phi0 is None else self.phi0
        phi = np.broadcast_to(np.asarray(phi0, dtype=float), (n,)).copy()
        return PerturbationState(lam, phi, self.eta, self.zeta)


class SolveStatus(str, enum.Enum):
    RELRES = "relres"
    MU_CAP = "mu_cap"
    ITER_EXACT = "iter_exact"
    ITER_LIMIT = "iter_limit"
    ILL_CONDITIONED = "ill_conditioned"


@dataclass(frozen=True)
class IterationRecord:
    """State after ``k`` steps.

    ``lam``/``phi`` are the perturbations in force during step ``k`` (the
    ones ``mu_lambda`` and ``relres`` are measured with); the shrunk values
    for the next step are in ``lam_next``/``phi_next``.
    """

    k: int
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    lam: np.ndarray
    phi: np.ndarray
    lam_next: np.ndarray
    phi_next: np.ndarray
    mu_lambda: float
    relres: float
    alpha_p: float
    alpha_d: float
    sigma: float
    newton_residual: float
    partition: ActivityPartition

    @property
    def iterate(self) -> Iterate:
        return Iterate(self.x, self.y, self.s, self.k)

    @property
    def perturbation(self) -> PerturbationState:
        return PerturbationState(self.lam, self.phi)


@dataclass
class SolveTrace:
    lp: StandardLP
    start: Iterate
    start_perturbation: PerturbationState
    start_partition: ActivityPartition
    records: list[IterationRecord] = field(default_factory=list)
    status: SolveStatus = SolveStatus.ITER_LIMIT
    message: str = ""

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final(self) -> Iterate:
        return self.records[-1].iterate if self.records else self.start

    def partition_at(self, k: int) -> ActivityPartition:
        """Partition after ``k`` iterations (``k = 0`` is the start)."""
        if k == 0:
            return self.start_partition
        return self.records[k - 1].partition

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            p = r.partition
            w.writerow([r.k, repr(r.mu_lambda), repr(r.relres), repr(r.alpha_p), repr(r.alpha_d),
                        len(p.active), len(p.inactive), len(p.undetermined),
                        repr(float(r.lam.max(initial=0.0))), repr(float(r.phi.max(initial=0.0)))])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w", newline="") as fh:
                fh.write(text)
        return text


def mehrotra_start(lp: StandardLP) -> Iterate:
    """Least-squares point shifted into the positive orthant.

    Raises :class:`RankError` if ``AA'`` is not positive definite.
    """
    A, b, c = lp.A, lp.b, lp.c
    try:
        factor = scipy.linalg.cho_factor(A @ A.T)
    except np.linalg.LinAlgError as exc:
        raise RankError("A A' is singular; remove dependent rows first") from exc
    x = A.T @ scipy.linalg.cho_solve(factor, b)
    y = scipy.linalg.cho_solve(factor, A @ c)
    s = c - A.T @ y
    x = x + max(-1.5 * x.min(), 0.0)
    s = s + max(-1.5 * s.min(), 0.0)
    xs = float(x @ s)
    if xs > 0.0:
        x, s = x + 0.5 * xs / s.sum(), s + 0.5 * xs / x.sum()
    else:
        # x's = 0 leaves both corrections undefined or zero; use a unit shift
        x, s = x + 1.0, s + 1.0
    return Iterate(x, y, s, 0)


def duality_measure(it: Iterate, p: PerturbationState) -> float:
    """``(x + lam)'(s + phi) / n``."""
    return float((it.x + p.lam) @ (it.s + p.phi)) / it.x.size


def _residuals(lp: StandardLP, it: Iterate, p: PerturbationState, target: float):
    rp = lp.A @ it.x - lp.b
    rd = lp.A.T @ it.y + it.s - lp.c
    rc = (it.x + p.lam) * (it.s + p.phi) - target
    return rp, rd, rc


def relative_residual(lp: StandardLP, it: Iterate, p: PerturbationState) -> float:
    """Norm of the primal, dual and centred complementarity residuals,
    divided by ``1 + max(||b||, ||c||)``."""
    mu = duality_measure(it, p)
    rp, rd, rc = _residuals(lp, it, p, mu)
    num = np.sqrt(rp @ rp + rd @ rd + rc @ rc)
    return float(num / (1.0 + max(np.linalg.norm(lp.b), np.linalg.norm(lp.c))))


def _block_residual(A, xl, sp, rp, rd, rc, dx, dy, ds) -> float:
    e1 = A @ dx + rp
    e2 = A.T @ dy + ds + rd
    e3 = sp * dx + xl * ds + rc
    return float(np.sqrt(e1 @ e1 + e2 @ e2 + e3 @ e3))


def newton_direction(lp: StandardLP, it: Iterate, p: PerturbationState, sigma: float,
                     *, tol: float = 1e-8, return_residual: bool = False):
    """Newton step for the perturbed central-path equations.

    Solves the reduced augmented system ``[[-D, A'], [A, 0]]`` with
    ``D = (X + Lam)^-1 (S + Phi)`` by a symmetric indefinite factorization,
    recovers ``ds`` by back-substitution and checks the residual of the full
    three-block system against ``tol * (1 + ||rhs||)``. One or two steps of
    iterative refinement are taken if needed. Raises
    :class:`IllConditionedError` when the check still fails.
    """
    A = lp.A
    m, n = A.shape
    xl = it.x + p.lam
    sp = it.s + p.phi
    mu = duality_measure(it, p)
    rp, rd, rc = _residuals(lp, it, p, sigma * mu)
    rhs_norm = float(np.sqrt(rp @ rp + rd @ rd + rc @ rc))

    K = np.zeros((n + m, n + m))
    K[:n, :n] = np.diag(-sp / xl)
    K[:n, n:] = A.T
    K[n:, :n] = A
    rhs = np.concatenate([-rd + rc / xl, -rp])
    lu, piv, sol, info = lapack.dsysv(K, rhs, lower=0)
    if info != 0:
        raise IllConditionedError(it.k, f"augmented matrix is singular (info={info})")

    def unpack(v):
        dx, dy = v[:n], v[n:]
        return dx, dy, (-rc - sp * dx) / xl

    dx, dy, ds = unpack(sol)
    res = _block_residual(A, xl, sp, rp, rd, rc, dx, dy, ds)
    bound = tol * (1.0 + rhs_norm)
    for _ in range(2):
        if res <= bound or not np.isfinite(res):
            break
        corr = rhs - K @ sol
        delta, _ = lapack.dsytrs(lu, piv, corr, lower=0)
        trial = sol + delta
        tdx, tdy, tds = unpack(trial)
        tres = _block_residual(A, xl, sp, rp, rd, rc, tdx, tdy, tds)
        if not tres < res:
            break
        sol, res, dx, dy, ds = trial, tres, tdx, tdy, tds
    if not res <= bound:
        raise IllConditionedError(
            it.k, f"Newton residual {res:.3e} exceeds {bound:.3e}")
    if return_residual:
        return (dx, dy, ds), res
    return dx, dy, ds


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not neg.any():
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def step_lengths(it: Iterate, direction, p: PerturbationState,
                 fraction: float = 0.9995) -> tuple[float, float]:
    """Primal and dual step lengths keeping ``x + lam`` and ``s + phi`` positive."""
    dx, _, ds = direction
    alpha_p = min(1.0, fraction * _max_step(it.x + p.lam, dx))
    alpha_d = min(1.0, fraction * _max_step(it.s + p.phi, ds))
    return alpha_p, alpha_d


def _shrink(v: np.ndarray, shift: np.ndarray, eta: float, zeta: float) -> np.ndarray:
    t = float(v.min())
    if t > 0:
        return eta * shift
    return (1.0 - zeta) * shift + zeta * (-t)


def shrink_perturbations(next_it: Iterate, p: PerturbationState) -> PerturbationState:
    """Shrink the shifts after a step.

    With ``t = min(x)``: ``lam' = eta * lam`` if ``t > 0``, otherwise
    ``lam' = (1 - zeta) lam + zeta (-t) e``, which keeps ``x + lam'`` at least
    ``(1 - zeta)(x + lam) > 0``. ``phi`` is updated from ``min(s)`` the same way.
    """
    if not (np.all(next_it.x + p.lam > 0) and np.all(next_it.s + p.phi > 0)):
        raise ValueError("shrink_perturbations needs x + lam > 0 and s + phi > 0")
    lam = _shrink(next_it.x, p.lam, p.eta, p.zeta)
    phi = _shrink(next_it.s, p.phi, p.eta, p.zeta)
    return PerturbationState(lam, phi, p.eta, p.zeta)


def solve(lp: StandardLP, options: Optional[SolveOptions] = None, *,
          start: Optional[Iterate] = None,
          partition: Optional[ActivityPartition] = None) -> SolveTrace:
    """Run the perturbed path-following method.

    Each iteration solves for the Newton direction, takes the step, updates
    the active-set prediction, tests for termination and finally shrinks the
    perturbations. The start defaults to :func:`mehrotra_start` of ``lp``.
    An ill-conditioned Newton system ends the run with status
    ``ILL_CONDITIONED`` rather than raising.
    """
    opts = options or SolveOptions()
    it = start if start is not None else mehrotra_start(lp)
    p = opts.initial_perturbation(lp.n)
    part = partition if partition is not None else ActivityPartition.initial(lp.n, opts.cutoff)
    trace = SolveTrace(lp, it, p, part)
    limit = opts.iter_exact if opts.iter_exact is not None else opts.max_iters
    if limit == 0:
        trace.status = SolveStatus.ITER_EXACT if opts.iter_exact is not None else SolveStatus.ITER_LIMIT
        return trace

    for k in range(1, limit + 1):
        mu = duality_measure(it, p)
        sigma = opts.sigma_rule(mu)
        try:
            direction, nres = newton_direction(lp, it, p, sigma, tol=opts.newton_tol,
                                               return_residual=True)
        except IllConditionedError as exc:
            trace.status = SolveStatus.ILL_CONDITIONED
            trace.message = str(exc)
            return trace
        alpha_p, alpha_d = step_lengths(it, direction, p, opts.step_fraction)
        dx, dy, ds = direction
        it = Iterate(it.x + alpha_p * dx, it.y + alpha_d * dy, it.s + alpha_d * ds, k)
        if not (np.all(np.isfinite(it.x)) and np.all(np.isfinite(it.s))):
            trace.status = SolveStatus.ILL_CONDITIONED
            trace.message = f"iteration {k}: non-finite iterate"
            return trace

        part = part.observe(it.x, it.s)
        mu_new = duality_measure(it, p)
        relres = relative_residual(lp, it, p)
        p_next = shrink_perturbations(it, p) if opts.shrink else p
        trace.records.append(IterationRecord(
            k, it.x, it.y, it.s, p.lam, p.phi, p_next.lam, p_next.phi, mu_new, relres,
            alpha_p, alpha_d, sigma, nres, part))

        if opts.iter_exact is None:
            if opts.mu_cap is not None and mu_new < opts.mu_cap:
                trace.status = SolveStatus.MU_CAP
                return trace
            if opts.relres_tol is not None and relres < opts.relres_tol:
                trace.status = SolveStatus.RELRES
                return trace
        p = p_next

    trace.status = SolveStatus.ITER_EXACT if opts.iter_exact is not None else SolveStatus.ITER_LIMIT
    return trace
