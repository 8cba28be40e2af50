"""Shared estimator machinery for the online interval algorithms."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_alpha, check_finite_scalar, check_stream
from ..constructors import make_constructor
from ..core import CONSTRUCTORS, PredictionInterval, ProtocolError, StreamStep, default_theta1, miss_indicator


class OnlineIntervalEstimator(BaseEstimator):
    """Base class for predict-then-observe interval estimators.

    Subclasses implement ``_init_state``, ``_propose`` and ``_learn``. The
    public surface is sklearn-flavoured:

    * ``fit(y, mu_hat)`` resets and runs the whole stream,
    * ``partial_fit(y, mu_hat)`` continues from the current state,
    * ``predict(mu_hat)`` returns intervals under the current state without
      learning anything,
    * ``predict_interval`` / ``update`` expose a single step of the protocol.

    After fitting, ``steps_`` holds every :class:`StreamStep` and the array
    attributes ``intervals_``, ``thetas_``, ``errors_`` and ``radii_`` mirror it.
    """

    def __init__(self, alpha=0.9, constructor="quantile", theta1=None, score_fn=None):
        self.alpha = alpha
        self.constructor = constructor
        self.theta1 = theta1
        self.score_fn = score_fn

    # -- state management -------------------------------------------------

    def _resolved_theta1(self):
        if self.theta1 is None:
            return default_theta1(self.alpha_, self.constructor)
        return check_finite_scalar(self.theta1, "theta1")

    def reset(self):
        """Discard all learned state and start a fresh stream."""
        if self.constructor not in CONSTRUCTORS:
            raise ValueError(f"unknown interval constructor {self.constructor!r}")
        self.alpha_ = check_alpha(self.alpha)
        self.constructor_ = make_constructor(self.constructor, self.score_fn)
        self.t_ = 0
        self.steps_ = []
        self._pending = None
        self._init_state()
        return self

    def _ensure_started(self):
        if not hasattr(self, "t_"):
            self.reset()

    # -- protocol ---------------------------------------------------------

    def predict_interval(self, prediction) -> PredictionInterval:
        """Emit the interval for the next time step."""
        self._ensure_started()
        if self._pending is not None:
            raise ProtocolError("previous interval has not been resolved with update()")
        prediction = check_finite_scalar(prediction, "prediction")
        interval, theta = self._propose(prediction)
        self._pending = (prediction, interval, theta)
        return interval

    def update(self, outcome) -> StreamStep:
        """Reveal the outcome for the pending interval and learn from it."""
        if getattr(self, "_pending", None) is None:
            raise ProtocolError("update() called before predict_interval()")
        outcome = check_finite_scalar(outcome, "outcome")
        prediction, interval, theta = self._pending
        radius = self.constructor_.radius(prediction, outcome)
        err = miss_indicator(interval, outcome)
        self._learn(prediction, outcome, interval, theta, radius, err)
        self.constructor_.observe(prediction, outcome)
        self.t_ += 1
        step = StreamStep(self.t_, prediction, outcome, interval, err, theta, radius)
        self.steps_.append(step)
        self._pending = None
        return step

    # -- sklearn surface --------------------------------------------------

    def fit(self, y, mu_hat):
        """Run the full stream of outcomes ``y`` with point predictions ``mu_hat``."""
        self.reset()
        return self.partial_fit(y, mu_hat)

    def partial_fit(self, y, mu_hat):
        y, mu_hat = check_stream(y, mu_hat)
        self._ensure_started()
        for prediction, outcome in zip(mu_hat, y):
            self.predict_interval(prediction)
            self.update(outcome)
        self._refresh_arrays()
        return self

    def predict(self, mu_hat):
        """Intervals the current state would emit for each point prediction.

        Returns an ``(n, 2)`` array of lower and upper bounds. No state is
        modified, so every row uses the same learned parameters.
        """
        check_is_fitted(self, "steps_")
        if self._pending is not None:
            raise ProtocolError("cannot predict while an interval is awaiting its outcome")
        mu_hat = np.atleast_1d(np.asarray(mu_hat, dtype=float))
        if not np.all(np.isfinite(mu_hat)):
            raise ValueError("mu_hat must be finite")
        out = np.empty((mu_hat.size, 2))
        for i, prediction in enumerate(mu_hat):
            interval, _ = self._propose(float(prediction), commit=False)
            out[i] = interval.lower, interval.upper
        return out

    def _refresh_arrays(self):
        steps = self.steps_
        self.intervals_ = np.array([[s.interval.lower, s.interval.upper] for s in steps]).reshape(-1, 2)
        self.thetas_ = np.array([s.theta for s in steps])
        self.errors_ = np.array([s.err for s in steps], dtype=int)
        self.radii_ = np.array([s.radius for s in steps])

    # -- hooks ------------------------------------------------------------

    def _init_state(self):
        raise NotImplementedError

    def _propose(self, prediction, commit=True):
        """Return ``(interval, theta)`` for the next step.

        ``commit=False`` must leave all state untouched.
        """
        raise NotImplementedError

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        raise NotImplementedError


def resolve_step_size(gamma, D, constructor):
    """Learning rate and maximum radius for the SF-OGD family.

    ``gamma`` defaults to ``D / sqrt(3)``; ``D`` defaults to ``gamma * sqrt(3)``
    or, for the quantile constructor, to 1.
    """
    if D is None and gamma is None:
        if constructor != "quantile":
            raise ValueError("either gamma or the maximum radius D must be given for the linear constructor")
        D = 1.0
    if D is not None:
        D = float(D)
        if not (math.isfinite(D) and D > 0):
            raise ValueError(f"D must be positive and finite, got {D!r}")
    if gamma is None:
        gamma = D / math.sqrt(3)
    gamma = float(gamma)
    if not (math.isfinite(gamma) and gamma > 0):
        raise ValueError(f"gamma must be positive and finite, got {gamma!r}")
    if D is None:
        D = gamma * math.sqrt(3)
    return gamma, D
