"""Aggregated ACI: separate BOA mixtures of the candidates' lower and upper bounds."""

from __future__ import annotations

import math

import numpy as np

from .._validation import check_gamma_grid
from ..core import DEFAULT_GAMMA_GRID, PredictionInterval
from .base import OnlineIntervalEstimator
from .boa import BoaCombiner


class AgACI(OnlineIntervalEstimator):
    """Aggregated adaptive conformal inference.

    One ACI candidate runs per learning rate. The lower bounds are combined by
    a BOA mixture targeting the ``(1 - alpha) / 2`` quantile of the outcome and
    the upper bounds by one targeting ``1 - (1 - alpha) / 2``, so the emitted
    interval need not be symmetric around the point prediction.

    Candidates with an unbounded quantile interval are capped at the largest
    stored score before aggregation. Before any score exists every candidate
    is unbounded and the emitted interval is the whole real line.

    ``theta`` is not defined for this method; steps record NaN.
    """

    def __init__(self, gamma_grid=DEFAULT_GAMMA_GRID, alpha=0.9, constructor="quantile", theta1=None,
                 score_fn=None):
        super().__init__(alpha=alpha, constructor=constructor, theta1=theta1, score_fn=score_fn)
        self.gamma_grid = gamma_grid

    def _init_state(self):
        self.gammas_ = check_gamma_grid(self.gamma_grid)
        K = self.gammas_.size
        self.expert_thetas_ = np.full(K, self._resolved_theta1())
        miscoverage = 1 - self.alpha_
        self.boa_lower_ = BoaCombiner(K, miscoverage / 2)
        self.boa_upper_ = BoaCombiner(K, 1 - miscoverage / 2)
        self.crossing_count_ = 0
        self._candidates = None

    def candidate_bounds(self, prediction):
        """Lower and upper bounds of every candidate, capped for aggregation."""
        K = self.gammas_.size
        lower = np.empty(K)
        upper = np.empty(K)
        for k, theta in enumerate(self.expert_thetas_):
            iv = self.constructor_.interval(prediction, theta)
            lower[k], upper[k] = iv.lower, iv.upper
        if np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)):
            return lower, upper
        cap = self.constructor_.finite_cap(prediction)
        if cap is None:
            return None
        lower = np.maximum(lower, prediction - cap)
        upper = np.minimum(upper, prediction + cap)
        return lower, upper

    def _propose(self, prediction, commit=True):
        bounds = self.candidate_bounds(prediction)
        if commit:
            self._candidates = bounds
        if bounds is None:
            return PredictionInterval(-math.inf, math.inf), math.nan
        lower = self.boa_lower_.combine(bounds[0])
        upper = self.boa_upper_.combine(bounds[1])
        if lower > upper:
            if commit:
                self.crossing_count_ += 1
            lower, upper = upper, lower
        return PredictionInterval(lower, upper), math.nan

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        errs = self.constructor_.misses(prediction, outcome, self.expert_thetas_)
        self.expert_thetas_ = self.expert_thetas_ + self.gammas_ * (errs - (1 - self.alpha_))
        if self._candidates is not None:
            lower, upper = self._candidates
            self.boa_lower_.update(lower, outcome)
            self.boa_upper_.update(upper, outcome)
        self._candidates = None

    @property
    def lower_weights_(self):
        return self.boa_lower_.weights

    @property
    def upper_weights_(self):
        return self.boa_upper_.weights
