import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from pertlp.problem import (ActiveSetLabel, InfeasibleError, LabelSource, StandardLP,
                            ensure_full_rank)


def test_standard_lp_validates_shapes():
    with pytest.raises(ValueError):
        StandardLP([[1.0, 1.0]], [1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        StandardLP([[1.0], [2.0]], [1.0, 2.0], [1.0])  # m > n
    with pytest.raises(ValueError):
        StandardLP([[np.inf, 1.0]], [1.0], [1.0, 1.0])


def test_standard_lp_is_read_only():
    lp = StandardLP([[1.0, 1.0]], [1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        lp.A[0, 0] = 3.0


def test_shifted_problem():
    lp = StandardLP([[1.0, 1.0]], [1.0], [1.0, 2.0])
    sh = lp.shifted(np.array([0.01, 0.05]))
    assert_allclose(sh.b, [1.06])
    assert_allclose(sh.c, [1.01, 2.05])


def test_duplicate_row_removed():
    lp = StandardLP([[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0], [0.0, 0.0])
    out = ensure_full_rank(lp)
    assert_array_equal(out.A, [[1.0, 1.0]])
    assert_array_equal(out.b, [1.0])


def test_inconsistent_duplicate_names_row():
    lp = StandardLP([[1.0, 1.0], [2.0, 2.0]], [1.0, 3.0], [0.0, 0.0], row_names=("r1", "r2"))
    with pytest.raises(InfeasibleError, match="r2|r1"):
        ensure_full_rank(lp)


def test_full_rank_input_unchanged():
    lp = StandardLP([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]], [1.0, 1.0], [0.0, 0.0, 0.0])
    assert ensure_full_rank(lp) is lp


def test_kept_rows_preserve_order():
    A = np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0], [1.0, 1.0, 0.0, 2.0],
                  [0.0, 0.0, 1.0, 1.0]])
    lp = StandardLP(A, A @ np.ones(4), np.zeros(4))
    out = ensure_full_rank(lp)
    assert out.m == 3
    assert np.linalg.matrix_rank(out.A) == 3
    # remaining rows appear in the same relative order as in the input
    idx = [int(np.flatnonzero((A == row).all(axis=1))[0]) for row in out.A]
    assert idx == sorted(idx)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ensure_full_rank_idempotent(seed):
    rng = np.random.default_rng(seed)
    m, n, r = 6, 9, int(rng.integers(1, 6))
    A = rng.standard_normal((r, n))
    A = np.vstack([A, rng.standard_normal((m - r, r)) @ A])
    x = rng.random(n)
    lp = StandardLP(A, A @ x, rng.random(n))
    once = ensure_full_rank(lp)
    twice = ensure_full_rank(once)
    assert once.m == r
    assert_array_equal(once.A, twice.A)
    assert_array_equal(once.b, twice.b)
    assert_allclose(once.A @ x, once.b)


def test_active_set_label_sorted():
    lab = ActiveSetLabel((3, 1, 2), LabelSource.PREDICTED)
    assert lab.indices == (1, 2, 3)
    assert lab.as_set() == {1, 2, 3}
