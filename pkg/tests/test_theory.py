import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from pertlp.problem import StandardLP
from pertlp.theory import (TheoryConstants, error_residuals, estimate_tau,
                           feasible_error_residuals, mu_thresholds, perfect_perturbation,
                           psi_values, relaxed_interval, solution_epsilon)

WORKED = StandardLP([[1.0, 1.0]], [1.0], [1.0, 2.0])
X_STAR, Y_STAR, S_STAR = np.array([1.0, 0.0]), np.array([1.0]), np.array([0.0, 1.0])
LAM = 0.01 * np.array([1.0, 5.0])


def test_perfect_perturbation_worked_example():
    lam = perfect_perturbation(X_STAR, S_STAR, 0.01)
    assert_allclose(lam, [0.00990195, 0.00990195], rtol=1e-6)
    assert_allclose((X_STAR + lam) * (S_STAR + lam), 0.01, rtol=1e-12)


def test_perfect_perturbation_at_zero():
    assert_allclose(perfect_perturbation(np.zeros(3), np.zeros(3), 1.0), np.ones(3))


def test_perfect_perturbation_rejects_bad_input():
    with pytest.raises(ValueError):
        perfect_perturbation([1.0], [1.0], 0.1)
    with pytest.raises(ValueError):
        perfect_perturbation([1.0], [0.0], 0.0)


@st.composite
def complementary_pairs(draw):
    n = draw(st.integers(1, 50))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    zero_x = rng.random(n) < 0.5
    vals = rng.exponential(1.0, n) * (rng.random(n) < 0.9)
    x = np.where(zero_x, 0.0, vals)
    s = np.where(zero_x, vals, 0.0)
    mu = 10.0 ** draw(st.floats(-8, 1))
    return x, s, mu


@settings(max_examples=200, deadline=None)
@given(complementary_pairs())
def test_perfect_perturbation_identity(case):
    x, s, mu = case
    lam = perfect_perturbation(x, s, mu)
    assert (lam > 0).all()
    assert_allclose((x + lam) * (s + lam), mu, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(complementary_pairs(), st.floats(0.05, 0.95))
def test_relaxed_sandwich(case, xi):
    x, s, mu = case
    iv = relaxed_interval(x, s, mu, xi)
    for lam in (iv.lower, iv.upper, 0.5 * (iv.lower + iv.upper)):
        prod = (x + lam) * (s + lam)
        assert (prod >= xi * mu * (1 - 1e-12)).all()
        assert (prod <= mu / xi * (1 + 1e-12)).all()


def test_relaxed_interval_worked_numbers():
    iv = relaxed_interval(X_STAR, S_STAR, 0.01, 0.5)
    assert_allclose(iv.lower, 0.0049752, rtol=1e-4)
    assert_allclose(iv.upper, 0.019615, rtol=1e-4)
    assert iv.contains(perfect_perturbation(X_STAR, S_STAR, 0.01))


def test_relaxed_interval_collapses_near_one():
    iv = relaxed_interval(X_STAR, S_STAR, 0.01, 1 - 1e-12)
    lam = perfect_perturbation(X_STAR, S_STAR, 0.01)
    assert_allclose(iv.lower, lam, rtol=1e-9)
    assert_allclose(iv.upper, lam, rtol=1e-9)


@pytest.mark.parametrize("xi", [0.0, 1.0, -0.5, 2.0])
def test_relaxed_interval_rejects_xi(xi):
    with pytest.raises(ValueError):
        relaxed_interval(X_STAR, S_STAR, 0.01, xi)


def test_error_residuals_at_solution():
    assert error_residuals(WORKED, X_STAR, Y_STAR) == (0.0, 0.0)
    assert feasible_error_residuals(X_STAR, S_STAR) == (0.0, 0.0)


def test_error_residuals_non_complementary():
    x, y = np.array([0.5, 0.5]), np.array([0.0])
    r, w = error_residuals(WORKED, x, y)
    assert r > 0 and w > 0
    assert (r, w) == pytest.approx(feasible_error_residuals(x, WORKED.c))


def test_residual_bound_on_perturbed_feasible_points():
    # r <= sqrt(n) mu_lambda / C1 + ||lambda|| at strictly feasible points of the shifted problem
    n, C1 = 2, 1.04 / 2
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(2000):
        x1 = rng.uniform(-0.01, 1.01)
        x = np.array([x1, 1 - x1])
        y = rng.uniform(-3, 1.05)
        s = WORKED.c - y
        if not ((x + LAM > 0).all() and (s + LAM > 0).all()):
            continue
        mu = (x + LAM) @ (s + LAM) / n
        r, _ = feasible_error_residuals(x, s)
        assert r <= np.sqrt(n) * mu / C1 + np.linalg.norm(LAM)
        checked += 1
    assert checked > 100


def test_epsilon_and_psi():
    assert solution_epsilon(X_STAR, S_STAR) == 1.0
    x_l = np.array([1.05, -0.05])
    s_l = np.array([-0.01, 0.99])
    assert solution_epsilon(x_l + LAM, s_l + LAM) == pytest.approx(1.04, abs=1e-15)
    assert psi_values(X_STAR, S_STAR) == (1.0, 1.0)


def test_thresholds_worked_example():
    tc = TheoryConstants(1.0, 1.04, 1.0, 0.8, 0.8, 0.01, 2)
    mu_l, mu_bar, mu_max = mu_thresholds(tc)
    assert mu_l == pytest.approx(0.0662, rel=1e-2)
    assert mu_bar == pytest.approx(0.0027, rel=1e-2)
    assert mu_max == pytest.approx(0.0025, rel=1e-12)
    assert tc.C1 == pytest.approx(0.52)
    assert tc.rho == pytest.approx(1.25)


def test_theory_constants_validate():
    with pytest.raises(ValueError):
        TheoryConstants(1.0, 1.04, 1.0, 0.8, 0.8, 1.5, 2)
    with pytest.raises(ValueError):
        TheoryConstants(0.0, 1.04, 1.0, 0.8, 0.8, 0.01, 2)


def test_tau_worked_example():
    tp, td = estimate_tau(WORKED, 500, x_star=X_STAR, y_star=Y_STAR, lam=LAM)
    assert tp == pytest.approx(0.8, abs=0.15)
    assert td == pytest.approx(0.8, abs=0.15)


def test_tau_monotone_in_samples():
    prev = (0.0, 0.0)
    for k in (25, 50, 100, 200):
        cur = estimate_tau(WORKED, k, x_star=X_STAR, y_star=Y_STAR, lam=LAM, seed=3)
        assert cur[0] >= prev[0] and cur[1] >= prev[1]
        prev = cur


def test_tau_bounds_every_tested_point():
    tp, td = estimate_tau(WORKED, 300, x_star=X_STAR, y_star=Y_STAR, lam=LAM)
    rng = np.random.default_rng(1)
    for _ in range(300):
        # stay inside the unit sampling box (null-space direction has entries 1/sqrt 2)
        x1, y = X_STAR[0] + rng.uniform(-0.7, 0.7), Y_STAR[0] + rng.uniform(-1, 1)
        x = np.array([x1, 1 - x1])
        s = WORKED.c - y
        if not ((x + LAM > 0).all() and (s + LAM > 0).all()):
            continue
        r, w = feasible_error_residuals(x, s)
        assert np.linalg.norm(x - X_STAR) / (r + w) <= tp + 1e-12
        assert np.linalg.norm(s - S_STAR) / (r + w) <= td + 1e-12
