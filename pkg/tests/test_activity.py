import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_array_equal

from pertlp.activity import (ActivityPartition, prediction_ratios, predicted_sets,
                             threshold_test, update_partition)


def test_threshold_test_definition():
    assert_array_equal(threshold_test([1e-7, 0.3], [0.4, 1e-7], 1e-5), [True, False])


def test_threshold_test_boundary_is_false():
    assert_array_equal(threshold_test([1e-5], [1e-5], 1e-5), [False])


def test_threshold_test_large_x():
    assert not threshold_test(np.full(4, 10.0), np.ones(4)).any()


def _state(active=(), inactive=(), undetermined=(), prev=None):
    return ActivityPartition(frozenset(active), frozenset(inactive), frozenset(undetermined),
                             None if prev is None else np.array(prev, dtype=bool))


def test_first_update_only_records():
    st0 = ActivityPartition.initial(3)
    st1 = st0.update(np.array([True, False, True]))
    assert st1.undetermined == {0, 1, 2}
    assert_array_equal(st1.prev_test, [True, False, True])


def test_undetermined_twice_true_becomes_active():
    out = update_partition(_state(undetermined={0}, prev=[True]), np.array([True]))
    assert out.active == {0}


def test_active_failing_test_returns_to_undetermined():
    out = update_partition(_state(active={0}, prev=[True]), np.array([False]))
    assert out.undetermined == {0}


def test_undetermined_true_then_false_becomes_inactive():
    out = update_partition(_state(undetermined={0}, prev=[True]), np.array([False]))
    assert out.inactive == {0}


def test_inactive_passing_test_returns_to_undetermined():
    out = update_partition(_state(inactive={0}, prev=[False]), np.array([True]))
    assert out.undetermined == {0}


def test_update_rejects_wrong_length():
    with pytest.raises(ValueError):
        ActivityPartition.initial(3).update(np.array([True]))


def test_predicted_sets_worked_example():
    pacs, psas = predicted_sets([1.0, 0.0], [0.0, 1.0], 0.5)
    assert pacs == {1} and psas == {1}


def test_predicted_sets_nonpositive_cutoff():
    pacs, _ = predicted_sets([0.0, 2.0], [1.0, 0.0], 0.0)
    assert pacs == frozenset()


@settings(max_examples=200)
@given(st.lists(st.tuples(st.booleans(), st.floats(0, 10)), min_size=1, max_size=20),
       st.floats(1e-6, 5))
def test_psas_subset_of_pacs_for_complementary_pair(data, C):
    x = np.array([0.0 if z else v for z, v in data])
    s = np.array([v if z else 0.0 for z, v in data])
    pacs, psas = predicted_sets(x, s, C)
    assert psas <= pacs


def test_ratio_examples():
    r = prediction_ratios({0, 1}, {1, 2})
    assert (r.false_ratio, r.missed_ratio, r.correct_ratio) == (1 / 3, 1 / 3, 1 / 3)
    r = prediction_ratios({4, 5}, {4, 5})
    assert (r.false_ratio, r.missed_ratio, r.correct_ratio) == (0.0, 0.0, 1.0)
    r = prediction_ratios(set(), {0})
    assert (r.false_ratio, r.missed_ratio, r.correct_ratio) == (0.0, 1.0, 0.0)
    r = prediction_ratios(set(), set())
    assert r.correct_ratio == 1.0


index_sets = st.frozensets(st.integers(0, 60), max_size=40)


@settings(max_examples=300)
@given(index_sets, index_sets)
def test_ratio_identity(p, a):
    r = prediction_ratios(p, a)
    assert r.total == 1.0
    assert min(r.false_ratio, r.missed_ratio, r.correct_ratio) >= 0.0


tests = st.integers(1, 30).flatmap(
    lambda n: st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=1, max_size=8))


@settings(max_examples=300)
@given(tests)
def test_partition_invariants(seq):
    state = ActivityPartition.initial(len(seq[0]))
    for t in seq:
        state = state.update(np.array(t))
        state.check()
        # a predicted-active index passed the test at this iteration
        assert all(t[i] for i in state.active)
        assert not any(t[i] for i in state.inactive)
