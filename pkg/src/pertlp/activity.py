"""Active-set prediction from interior point iterates and its quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

DEFAULT_CUTOFF = 1e-5


def threshold_test(x: np.ndarray, s: np.ndarray, cutoff: float = DEFAULT_CUTOFF) -> np.ndarray:
    """Boolean vector, true where ``x_i < C`` and ``s_i > C``."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    return (x < cutoff) & (s > cutoff)


@dataclass(frozen=True)
class ActivityPartition:
    """Predicted active, predicted inactive and undetermined index sets.

    ``prev_test`` is the raw threshold test of the previous update, or
    ``None`` before the first one.
    """

    active: frozenset[int]
    inactive: frozenset[int]
    undetermined: frozenset[int]
    prev_test: Optional[np.ndarray] = None
    cutoff: float = DEFAULT_CUTOFF

    @classmethod
    def initial(cls, n: int, cutoff: float = DEFAULT_CUTOFF) -> "ActivityPartition":
        return cls(frozenset(), frozenset(), frozenset(range(n)), None, cutoff)

    @property
    def n(self) -> int:
        return len(self.active) + len(self.inactive) + len(self.undetermined)

    def update(self, test_now: np.ndarray) -> "ActivityPartition":
        return update_partition(self, test_now)

    def observe(self, x: np.ndarray, s: np.ndarray) -> "ActivityPartition":
        return update_partition(self, threshold_test(x, s, self.cutoff))

    def check(self) -> None:
        a, i, u = self.active, self.inactive, self.undetermined
        if a & i or a & u or i & u:
            raise AssertionError("partition sets overlap")
        if (a | i | u) != frozenset(range(self.n)):
            raise AssertionError("partition does not cover all indices")


def update_partition(state: ActivityPartition, test_now: np.ndarray) -> ActivityPartition:
    """One step of the three-set prediction procedure.

    An undetermined index becomes active when the test held at both the
    previous and the current iteration and inactive otherwise. An active
    index whose test fails, or an inactive index whose test passes, returns
    to the undetermined set. The very first call only records the test.
    """
    test_now = np.asarray(test_now, dtype=bool)
    if test_now.shape != (state.n,):
        raise ValueError(f"test vector has shape {test_now.shape}, expected ({state.n},)")
    if state.prev_test is None:
        return ActivityPartition(state.active, state.inactive, state.undetermined,
                                 test_now.copy(), state.cutoff)

    prev = state.prev_test
    active = set(state.active)
    inactive = set(state.inactive)
    undetermined = set(state.undetermined)
    for i in sorted(state.undetermined):
        undetermined.discard(i)
        if prev[i] and test_now[i]:
            active.add(i)
        else:
            inactive.add(i)
    # the two checks below run after the moves above, as sequential rules
    for i in sorted(active):
        if not test_now[i]:
            active.discard(i)
            undetermined.add(i)
    for i in sorted(inactive):
        if test_now[i]:
            inactive.discard(i)
            undetermined.add(i)
    return ActivityPartition(frozenset(active), frozenset(inactive), frozenset(undetermined),
                             test_now.copy(), state.cutoff)


def predicted_sets(x: np.ndarray, s: np.ndarray, cutoff: float) -> tuple[frozenset[int], frozenset[int]]:
    """Cut-off sets ``({i: x_i < C}, {i: s_i >= C})``."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    return (frozenset(np.flatnonzero(x < cutoff).tolist()),
            frozenset(np.flatnonzero(s >= cutoff).tolist()))


@dataclass(frozen=True)
class PredictionRatios:
    false_ratio: float
    missed_ratio: float
    correct_ratio: float

    @property
    def total(self) -> float:
        return self.false_ratio + self.missed_ratio + self.correct_ratio


def prediction_ratios(predicted: Iterable[int], actual: Iterable[int]) -> PredictionRatios:
    """False, missed and correct prediction ratios over ``|predicted ∪ actual|``.

    Two empty sets count as a perfect prediction ``(0, 0, 1)``. The three
    quotients are rounded from exact fractions so they add up to one.
    """
    p, a = frozenset(predicted), frozenset(actual)
    union = len(p | a)
    if union == 0:
        return PredictionRatios(0.0, 0.0, 1.0)
    false = Fraction(len(p - a), union)
    missed = Fraction(len(a - p), union)
    correct = 1 - false - missed
    f, mi = float(false), float(missed)
    # the correct ratio takes up any rounding so the float sum is exactly one
    co = float(correct)
    head = f + mi
    if head + co != 1.0:
        co = 1.0 - head
        while head + co > 1.0:
            co = math.nextafter(co, 0.0)
        while head + co < 1.0:
            co = math.nextafter(co, 1.0)
    return PredictionRatios(f, mi, co)
