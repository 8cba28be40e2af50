"""Nested interval constructors and the radius each one induces.

Two constructors are provided. The linear one uses ``theta`` directly as the
half-width around the point prediction; the quantile one uses the empirical
``theta``-quantile of previously observed nonconformity scores.

Out-of-range parameters follow the usual adaptive-conformal conventions: a
quantile level above one (or an empty score history) gives an infinite
half-width, and a level at or below zero gives ``-inf``, which is clamped to
the degenerate interval ``[mu, mu]``.
"""

from __future__ import annotations

import bisect
import math
from typing import Callable, Optional

import numpy as np

from .core import PredictionInterval, miss_indicator

# tolerance used when mapping theta * n onto an integer rank
_RANK_TOL = 1e-9


def absolute_residual(prediction: float, outcome: float) -> float:
    return abs(prediction - outcome)


def _interval_from_half_width(prediction: float, half_width: float) -> PredictionInterval:
    if half_width <= 0:
        return PredictionInterval(prediction, prediction)
    if math.isinf(half_width):
        return PredictionInterval(-math.inf, math.inf)
    return PredictionInterval(prediction - half_width, prediction + half_width)


def linear_interval(prediction: float, theta: float) -> PredictionInterval:
    """Return ``[prediction - theta, prediction + theta]``; negative theta gives ``[prediction, prediction]``."""
    return _interval_from_half_width(prediction, theta)


def linear_radius(prediction: float, outcome: float) -> float:
    return abs(prediction - outcome)


class NonconformityScoreStore:
    """Append-only multiset of nonconformity scores.

    Scores are kept both in arrival order and sorted, so quantile and rank
    queries are logarithmic.

    Parameters
    ----------
    score_fn : callable, optional
        ``(prediction, outcome) -> float``. Must be nonnegative and vanish when
        prediction equals outcome. Defaults to the absolute residual.
    """

    def __init__(self, score_fn: Optional[Callable[[float, float], float]] = None):
        self.score_fn = score_fn or absolute_residual
        self.scores: list[float] = []
        self._sorted: list[float] = []

    def __len__(self):
        return len(self.scores)

    def add_score(self, score: float) -> None:
        score = float(score)
        if not score >= 0:
            raise ValueError(f"nonconformity scores must be nonnegative, got {score!r}")
        self.scores.append(score)
        bisect.insort(self._sorted, score)

    def observe(self, prediction: float, outcome: float) -> float:
        score = self.score_fn(prediction, outcome)
        self.add_score(score)
        return score

    def order_statistic(self, k: int) -> float:
        """k-th smallest score, 1-based."""
        return self._sorted[k - 1]

    def count_below(self, value: float) -> int:
        return bisect.bisect_left(self._sorted, value)

    def copy(self) -> "NonconformityScoreStore":
        clone = NonconformityScoreStore(self.score_fn)
        clone.scores = list(self.scores)
        clone._sorted = list(self._sorted)
        return clone


def _quantile_rank(theta: float, n: int) -> int:
    """``ceil(theta * n)`` with a small tolerance so that ``(k / n) * n`` maps back to ``k``."""
    x = theta * n
    k = math.ceil(x)
    if k - x > 1 - _RANK_TOL:
        k -= 1
    return max(k, 1)


def empirical_quantile(theta: float, store: NonconformityScoreStore) -> float:
    """Empirical ``theta``-quantile: the ``ceil(theta * n)``-th smallest score.

    Returns ``+inf`` for ``theta > 1`` or an empty store and ``-inf`` for
    ``theta <= 0``.
    """
    n = len(store)
    if n == 0 or theta > 1:
        return math.inf
    if theta <= 0:
        return -math.inf
    return store.order_statistic(min(_quantile_rank(theta, n), n))


def quantile_interval(prediction: float, theta: float, store: NonconformityScoreStore) -> PredictionInterval:
    return _interval_from_half_width(prediction, empirical_quantile(theta, store))


def quantile_radius(prediction: float, outcome: float, store: NonconformityScoreStore) -> float:
    """Smallest grid level ``k / n`` whose quantile interval covers ``outcome``.

    A residual larger than every stored score cannot be covered at any level
    up to one; ``1 + 1/n`` is returned in that case. With no stored scores the
    interval is unbounded for every level, so the radius is ``0``.
    """
    n = len(store)
    if n == 0:
        return 0.0
    residual = store.score_fn(prediction, outcome)
    if residual == 0:
        return 0.0
    k = store.count_below(residual) + 1
    if k > n:
        return 1.0 + 1.0 / n
    return k / n


class LinearConstructor:
    name = "linear"

    def interval(self, prediction: float, theta: float) -> PredictionInterval:
        return linear_interval(prediction, theta)

    def radius(self, prediction: float, outcome: float) -> float:
        return linear_radius(prediction, outcome)

    def observe(self, prediction: float, outcome: float) -> None:
        pass

    def misses(self, prediction: float, outcome: float, thetas) -> np.ndarray:
        """Miss indicators for many parameters at once, bit-identical to :meth:`interval`."""
        half = np.maximum(np.asarray(thetas, dtype=float), 0.0)
        return ((outcome < prediction - half) | (outcome > prediction + half)).astype(int)

    def finite_cap(self, prediction: float) -> Optional[float]:
        return None


class QuantileConstructor:
    """Quantile constructor bound to its own score history."""

    name = "quantile"

    def __init__(self, score_fn: Optional[Callable[[float, float], float]] = None):
        self.store = NonconformityScoreStore(score_fn)

    def interval(self, prediction: float, theta: float) -> PredictionInterval:
        return quantile_interval(prediction, theta, self.store)

    def radius(self, prediction: float, outcome: float) -> float:
        return quantile_radius(prediction, outcome, self.store)

    def observe(self, prediction: float, outcome: float) -> None:
        self.store.observe(prediction, outcome)

    def misses(self, prediction: float, outcome: float, thetas) -> np.ndarray:
        return np.array([miss_indicator(self.interval(prediction, th), outcome) for th in thetas], dtype=int)

    def finite_cap(self, prediction: float) -> Optional[float]:
        """Largest finite half-width this constructor can currently emit."""
        if len(self.store) == 0:
            return None
        return self.store.order_statistic(len(self.store))


def make_constructor(name: str, score_fn=None):
    if name == "linear":
        if score_fn is not None:
            raise ValueError("custom nonconformity scores only apply to the quantile constructor")
        return LinearConstructor()
    if name == "quantile":
        return QuantileConstructor(score_fn)
    raise ValueError(f"unknown interval constructor {name!r}")
