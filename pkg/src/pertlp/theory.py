"""Calculators for perturbation sizes, error-bound residuals and prediction thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .problem import StandardLP


def _complementary(x: np.ndarray, s: np.ndarray, tol: float = 1e-10) -> None:
    if x.shape != s.shape:
        raise ValueError("x and s must have the same shape")
    if np.any(x < 0) or np.any(s < 0):
        raise ValueError("x and s must be nonnegative")
    if np.max(np.abs(x * s), initial=0.0) > tol:
        raise ValueError("x and s are not complementary")


def perfect_perturbation(x_star, s_star, mu_hat: float) -> np.ndarray:
    """Shift ``lam`` with ``(x*_i + lam_i)(s*_i + lam_i) = mu_hat`` for every ``i``.

    The positive root of ``lam^2 + (x*_i + s*_i) lam - mu_hat = 0`` in the
    form ``2 mu_hat / (a + sqrt(a^2 + 4 mu_hat))``, ``a = x*_i + s*_i``.
    """
    x = np.asarray(x_star, dtype=float)
    s = np.asarray(s_star, dtype=float)
    _complementary(x, s)
    if not mu_hat > 0:
        raise ValueError("mu_hat must be positive")
    a = x + s
    return 2.0 * mu_hat / (a + np.sqrt(a * a + 4.0 * mu_hat))


@dataclass(frozen=True)
class PerturbationInterval:
    lower: np.ndarray
    upper: np.ndarray
    xi: float
    mu_hat: float

    def contains(self, lam: np.ndarray) -> bool:
        return bool(np.all(self.lower <= lam) and np.all(lam <= self.upper))


def relaxed_interval(x_star, s_star, mu_hat: float, xi: float) -> PerturbationInterval:
    """Shifts keeping every product ``(x*_i + lam_i)(s*_i + lam_i)`` in
    ``[xi mu_hat, mu_hat / xi]``.

    The end points are the positive roots for ``xi mu_hat`` and
    ``mu_hat / xi``.
    """
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    x = np.asarray(x_star, dtype=float)
    s = np.asarray(s_star, dtype=float)
    _complementary(x, s)
    if not mu_hat > 0:
        raise ValueError("mu_hat must be positive")
    a = x + s
    lo_mu, hi_mu = xi * mu_hat, mu_hat / xi
    lower = 2.0 * lo_mu / (a + np.sqrt(a * a + 4.0 * lo_mu))
    upper = 2.0 * hi_mu / (a + np.sqrt(a * a + 4.0 * hi_mu))
    return PerturbationInterval(lower, upper, xi, mu_hat)


def error_residuals(lp: StandardLP, x, y) -> tuple[float, float]:
    """Residuals ``(r, w)`` of the LP error bound at an arbitrary ``(x, y)``.

    With ``s = c - A'y``::

        r = ||(min(x, s), min(y+, Ax - b), min(y-, b - Ax))||
        w = ||(-s, b - Ax, Ax - b, -x, c'x - b'y)+||

    where ``y+``/``y-`` are the positive and negative parts of ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = lp.c - lp.A.T @ y
    ax_b = lp.A @ x - lp.b
    yp = np.maximum(y, 0.0)
    ym = np.maximum(-y, 0.0)
    r = np.concatenate([np.minimum(x, s), np.minimum(yp, ax_b), np.minimum(ym, -ax_b)])
    w = np.concatenate([-s, -ax_b, ax_b, -x, [lp.c @ x - lp.b @ y]])
    return float(np.linalg.norm(r)), float(np.linalg.norm(np.maximum(w, 0.0)))


def feasible_error_residuals(x, s) -> tuple[float, float]:
    """``r = ||min(x, s)||`` and ``w = ||(-x, -s, x's)+||`` for points with
    ``Ax = b`` and ``A'y + s = c``."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    r = np.linalg.norm(np.minimum(x, s))
    w = np.linalg.norm(np.maximum(np.concatenate([-x, -s, [x @ s]]), 0.0))
    return float(r), float(w)


def solution_epsilon(x_star, s_star) -> float:
    """``min(min_{i inactive} x*_i, min_{i active} s*_i)`` for a unique solution pair.

    Index ``i`` counts as active when ``x*_i <= s*_i``, so for an exactly
    complementary pair this is ``min_i max(x*_i, s*_i)``, and small
    residual products from an approximate solution do not change it.
    """
    x = np.asarray(x_star, dtype=float)
    s = np.asarray(s_star, dtype=float)
    return float(np.min(np.maximum(x, s)))


def psi_values(x_star, s_star) -> tuple[float, float]:
    """``psi_p``: smallest positive ``x*_i``; ``psi_d``: smallest positive ``s*_i``."""
    x = np.asarray(x_star, dtype=float)
    s = np.asarray(s_star, dtype=float)
    return (float(x[x > 0].min(initial=np.inf)), float(s[s > 0].min(initial=np.inf)))


@dataclass(frozen=True)
class TheoryConstants:
    """Problem constants entering the prediction thresholds.

    ``epsilon`` belongs to the original problem and ``epsilon_lambda`` to the
    perturbed one.
    """

    epsilon: float
    epsilon_lambda: float
    psi_p: float
    tau_p: float
    tau_d: float
    gamma: float
    n: int
    psi_d: Optional[float] = None

    def __post_init__(self):
        for name in ("epsilon", "epsilon_lambda", "psi_p", "tau_p", "tau_d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def tau(self) -> float:
        return max(self.tau_p, self.tau_d)

    @property
    def C1(self) -> float:
        return self.epsilon_lambda / self.n

    @property
    def C2(self) -> float:
        return self.n * math.sqrt(self.n) / self.epsilon_lambda + self.n

    @property
    def rho(self) -> float:
        return self.psi_p / self.tau


def mu_thresholds(tc: TheoryConstants) -> tuple[float, float, float]:
    """``(mu_max_lambda, mu_bar_max_lambda, mu_max)``.

    ``mu_max_lambda = psi_p eps_l / (4 n tau (sqrt(n) + eps_l))``,
    ``mu_bar_max_lambda = eps_l^2 gamma / n^2`` and
    ``mu_max = eps^2 gamma / n^2``, with ``tau = max(tau_p, tau_d)``.
    """
    n, el = tc.n, tc.epsilon_lambda
    mu_max_lambda = tc.psi_p * el / (4.0 * n * tc.tau * (math.sqrt(n) + el))
    mu_bar = el * el * tc.gamma / n ** 2
    mu_max = tc.epsilon ** 2 * tc.gamma / n ** 2
    return mu_max_lambda, mu_bar, mu_max


def _tau_ratios(x, s, x_star, s_star):
    r, w = feasible_error_residuals(x, s)
    denom = r + w
    if denom <= 0:
        return None
    return np.linalg.norm(x - x_star) / denom, np.linalg.norm(s - s_star) / denom


def estimate_tau(lp: StandardLP, sample_count: int, *, x_star, y_star, lam=None, phi=None,
                 radius: float = 1.0, seed: int = 0, refine_steps: int = 40) -> tuple[float, float]:
    """Lower estimates of ``tau_p`` and ``tau_d``.

    Maximizes ``||x - x*|| / (r + w)`` and ``||s - s*|| / (r + w)`` over
    points with ``Ax = b``, ``s = c - A'y``, ``x > -lam`` and ``s > -phi``,
    sampled uniformly in null-space and dual coordinates within ``radius``
    of the solution. Every sample that sets a new running maximum is then
    improved by coordinate search with a halving step. Because the sample
    stream is fixed by ``seed``, a larger ``sample_count`` never returns a
    smaller estimate.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    A, c = lp.A, lp.c
    n = lp.n
    lam = np.zeros(n) if lam is None else np.broadcast_to(np.asarray(lam, float), (n,))
    phi = lam if phi is None else np.broadcast_to(np.asarray(phi, float), (n,))
    x_star = np.asarray(x_star, float)
    y_star = np.asarray(y_star, float)
    s_star = c - A.T @ y_star
    N = scipy.linalg.null_space(A)
    dim = N.shape[1] + lp.m

    rng = np.random.default_rng(seed)
    coords = rng.uniform(-radius, radius, size=(sample_count, dim))

    def point(u):
        x = x_star + N @ u[:N.shape[1]]
        y = y_star + u[N.shape[1]:]
        return x, c - A.T @ y

    def feasible(u):
        if np.any(np.abs(u) > radius):
            return None
        x, s = point(u)
        if np.all(x + lam > 0) and np.all(s + phi > 0):
            return _tau_ratios(x, s, x_star, s_star)
        return None

    best = [0.0, 0.0]
    records: list[list[np.ndarray]] = [[], []]
    found = False
    for u in coords:
        val = feasible(u)
        if val is None:
            continue
        found = True
        for t in (0, 1):
            if val[t] > best[t]:
                best[t] = val[t]
                records[t].append(u)
    if not found:
        raise RuntimeError("no strictly feasible sample found; enlarge radius or sample_count")

    for t in (0, 1):
        for u0 in records[t]:
            u = u0.copy()
            cur = feasible(u)[t]
            step = radius / 4
            for _ in range(refine_steps):
                improved = False
                for i in range(dim):
                    for sign in (1.0, -1.0):
                        trial = u.copy()
                        trial[i] += sign * step
                        val = feasible(trial)
                        if val is not None and val[t] > cur:
                            u, cur, improved = trial, val[t], True
                if not improved:
                    step /= 2
            best[t] = max(best[t], cur)
    return best[0], best[1]
