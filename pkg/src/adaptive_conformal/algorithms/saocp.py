"""Strongly Adaptive Online Conformal Prediction.

A new SF-OGD expert is born at every step and lives for ``g * 2**n`` steps,
where ``2**n`` is the largest power of two dividing its birth index. Active
experts are combined with coin-betting style weights on their pinball-loss
advantage over the combined output.
"""

from __future__ import annotations

import logging

import numpy as np

from .base import OnlineIntervalEstimator, resolve_step_size
from .pinball import pinball

_LOG = logging.getLogger(__name__)


def saocp_lifetime(i, g):
    """``g`` times the largest power of two dividing ``i``."""
    i = int(i)
    if i < 1:
        raise ValueError("birth index must be a positive integer")
    return int(g) * (i & -i)


def saocp_active_set(t, g):
    """Birth indices active at time ``t``, by direct enumeration."""
    return [i for i in range(1, t + 1) if t - saocp_lifetime(i, g) < i <= t]


def saocp_prior(ages):
    """Prior over active experts, ``a**-2 / (1 + floor(log2 a))`` normalised.

    ``ages`` are 1 for an expert born at the current step, so the newest
    experts receive the most prior mass.
    """
    ages = np.asarray(ages, dtype=np.int64)
    if ages.size == 0:
        raise ValueError("prior needs at least one active expert")
    if np.any(ages < 1):
        raise ValueError("ages must be positive")
    floor_log2 = np.array([int(a).bit_length() - 1 for a in ages])
    pi = 1.0 / (ages.astype(float) ** 2 * (1 + floor_log2))
    return pi / pi.sum()


class SAOCP(OnlineIntervalEstimator):
    """Strongly adaptive online conformal prediction.

    Parameters
    ----------
    gamma : float, optional
        SF-OGD learning rate of every expert; defaults to ``D / sqrt(3)``.
    D : float, optional
        Maximum radius used to scale the expert gains. Required (directly or
        through ``gamma``) for the linear constructor.
    lifetime_multiplier : int
        ``g`` in the lifetime formula.
    alpha : float
    constructor : {"linear", "quantile"}
    theta1 : float, optional
        Starting value handed to the first expert. The first emitted
        parameter is always 0.
    prior_index : {"birth", "age"}
        What the prior ``i**-2 / (1 + floor(log2 i))`` is evaluated at.
        ``"birth"`` (default) uses the expert's birth index, which puts most
        mass on long-lived early experts. ``"age"`` favours the newest experts
        and reacts faster, at the cost of noticeably lower coverage.
    """

    def __init__(self, gamma=None, D=None, lifetime_multiplier=8, alpha=0.9, constructor="linear",
                 theta1=None, prior_index="birth", score_fn=None):
        super().__init__(alpha=alpha, constructor=constructor, theta1=theta1, score_fn=score_fn)
        self.gamma = gamma
        self.D = D
        self.lifetime_multiplier = lifetime_multiplier
        self.prior_index = prior_index

    def _init_state(self):
        self.gamma_, self.D_ = resolve_step_size(self.gamma, self.D, self.constructor)
        if self.prior_index not in ("birth", "age"):
            raise ValueError(f"prior_index must be 'birth' or 'age', got {self.prior_index!r}")
        self.g_ = int(self.lifetime_multiplier)
        if self.g_ < 1:
            raise ValueError("lifetime_multiplier must be a positive integer")
        self.last_theta_ = self._resolved_theta1()
        self.births_ = np.zeros(0, dtype=np.int64)
        self.expiry_ = np.zeros(0, dtype=np.int64)
        self.expert_thetas_ = np.zeros(0)
        self.grad_sq_ = np.zeros(0)
        self.weights_ = np.zeros(0)
        self.sum_g_ = np.zeros(0)
        self.sum_wg_ = np.zeros(0)
        self.radius_violations_ = 0

    @property
    def active_births_(self):
        return self.births_.tolist()

    def _pool_at(self, t):
        """Active pool at step ``t`` including the expert born at ``t``."""
        keep = self.expiry_ > t
        births = np.append(self.births_[keep], t)
        expiry = np.append(self.expiry_[keep], t + saocp_lifetime(t, self.g_))
        thetas = np.append(self.expert_thetas_[keep], self.last_theta_)
        weights = np.append(self.weights_[keep], 0.0)
        return keep, births, expiry, thetas, weights

    def _combine(self, t, births, thetas, weights):
        prior = saocp_prior(t - births + 1 if self.prior_index == "age" else births)
        p_hat = prior * np.maximum(weights, 0.0)
        total = p_hat.sum()
        p = p_hat / total if total > 0 else prior
        return p

    def _propose(self, prediction, commit=True):
        t = self.t_ + 1
        keep, births, expiry, thetas, weights = self._pool_at(t)
        p = self._combine(t, births, thetas, weights)
        theta = 0.0 if t == 1 else float(p @ thetas)
        if commit:
            self.births_ = births
            self.expiry_ = expiry
            self.expert_thetas_ = thetas
            self.grad_sq_ = np.append(self.grad_sq_[keep], 0.0)
            self.weights_ = weights
            self.sum_g_ = np.append(self.sum_g_[keep], 0.0)
            self.sum_wg_ = np.append(self.sum_wg_[keep], 0.0)
            self.probabilities_ = p
        return self.constructor_.interval(prediction, theta), theta

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        t = self.t_ + 1
        alpha = self.alpha_
        if radius >= self.D_:
            self.radius_violations_ += 1
            _LOG.debug("radius %.6g at t=%d exceeds D=%.6g", radius, t, self.D_)

        thetas = self.expert_thetas_
        w = self.weights_
        gain = (pinball(theta, radius, alpha) - pinball(thetas, radius, alpha)) / self.D_
        gain = np.where(w > 0, gain, np.maximum(gain, 0.0))
        self.sum_g_ = self.sum_g_ + gain
        self.sum_wg_ = self.sum_wg_ + w * gain
        ages = t - self.births_ + 1
        self.weights_ = self.sum_g_ / ages * (1 + self.sum_wg_)

        # every active expert takes its own SF-OGD step
        errs = self.constructor_.misses(prediction, outcome, thetas)
        grads = 1.0 - alpha - errs
        self.grad_sq_ = self.grad_sq_ + grads**2
        self.expert_thetas_ = thetas - self.gamma_ * grads / np.sqrt(self.grad_sq_)
        self.last_theta_ = theta
