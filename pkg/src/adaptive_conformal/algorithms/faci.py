"""Fully Adaptive Conformal Inference: exponential reweighting of ACI experts."""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .._validation import check_gamma_grid
from ..core import DEFAULT_GAMMA_GRID, DEFAULT_INTERVAL_LENGTH
from .base import OnlineIntervalEstimator
from .pinball import pinball


def faci_eta_default(K, interval_length, alpha):
    """Closed-form reweighting rate, tuned for the quantile constructor.

    ``sqrt(3 / I) * sqrt((log(K * I) + 2) / (alpha^2 (1-alpha)^3 + (1-alpha)^2 alpha^3))``.
    The denominator is symmetric under ``alpha -> 1 - alpha``.
    """
    if K < 1 or interval_length < 1:
        raise ValueError("K and interval_length must be positive")
    inner = alpha**2 * (1 - alpha) ** 3 + (1 - alpha) ** 2 * alpha**3
    return math.sqrt(3 / interval_length) * math.sqrt((math.log(K * interval_length) + 2) / inner)


def faci_eta_online(loss_window, K, interval_length, alpha):
    """Rate learned from the last ``interval_length`` pinball losses.

    Falls back to :func:`faci_eta_default` while the window sum is zero.
    """
    total = float(sum(loss_window))
    if total <= 0:
        return faci_eta_default(K, interval_length, alpha)
    return math.sqrt((math.log(interval_length * K) + 2) / total)


def exponential_reweight(weights, losses, eta):
    return np.asarray(weights, dtype=float) * np.exp(-eta * np.asarray(losses, dtype=float))


def fixed_share_mix(wbar, sigma):
    """``(1 - sigma) * wbar + sigma * sum(wbar) / K``; preserves total weight."""
    wbar = np.asarray(wbar, dtype=float)
    return (1 - sigma) * wbar + wbar.sum() * sigma / wbar.size


class FACI(OnlineIntervalEstimator):
    """Fully adaptive conformal inference.

    Runs one ACI expert per learning rate and emits the probability-weighted
    average of their parameters.

    Parameters
    ----------
    gamma_grid : sequence of float
        Strictly increasing candidate learning rates.
    alpha : float
    constructor : {"quantile", "linear"}
    theta1 : float, optional
    interval_length : int
        Length of the time window the rate parameters are tuned for.
    sigma : float, optional
        Mixing rate; defaults to ``1 / (2 * interval_length)``.
    eta : float, optional
        Fixed reweighting rate. When omitted it is chosen by ``eta_mode``.
    eta_mode : {"auto", "fixed", "online"}
        ``auto`` uses the closed form for the quantile constructor and the
        online rate for the linear constructor.
    """

    def __init__(self, gamma_grid=DEFAULT_GAMMA_GRID, alpha=0.9, constructor="quantile", theta1=None,
                 interval_length=DEFAULT_INTERVAL_LENGTH, sigma=None, eta=None, eta_mode="auto",
                 score_fn=None):
        super().__init__(alpha=alpha, constructor=constructor, theta1=theta1, score_fn=score_fn)
        self.gamma_grid = gamma_grid
        self.interval_length = interval_length
        self.sigma = sigma
        self.eta = eta
        self.eta_mode = eta_mode

    def _init_state(self):
        self.gammas_ = check_gamma_grid(self.gamma_grid)
        K = self.gammas_.size
        self.interval_length_ = int(self.interval_length)
        if self.interval_length_ < 1:
            raise ValueError("interval_length must be a positive integer")
        self.sigma_ = 1 / (2 * self.interval_length_) if self.sigma is None else float(self.sigma)
        if not 0 <= self.sigma_ < 1:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma_!r}")
        if self.eta_mode not in ("auto", "fixed", "online"):
            raise ValueError(f"unknown eta_mode {self.eta_mode!r}")
        online = self.eta_mode == "online" or (self.eta_mode == "auto" and self.constructor == "linear")
        self.online_eta_ = online and self.eta is None
        self.eta_ = float(self.eta) if self.eta is not None else faci_eta_default(
            K, self.interval_length_, self.alpha_)
        self.expert_thetas_ = np.full(K, self._resolved_theta1())
        self.weights_ = np.ones(K)
        self.loss_window_ = deque(maxlen=self.interval_length_)

    @property
    def probabilities_(self):
        return self.weights_ / self.weights_.sum()

    def _propose(self, prediction, commit=True):
        theta = float(self.probabilities_ @ self.expert_thetas_)
        return self.constructor_.interval(prediction, theta), theta

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        K = self.gammas_.size
        eta = self.eta_
        if self.online_eta_:
            eta = faci_eta_online(self.loss_window_, K, self.interval_length_, self.alpha_)
        self.current_eta_ = eta
        losses = pinball(self.expert_thetas_, radius, self.alpha_)
        wbar = exponential_reweight(self.weights_, losses, eta)
        mixed = fixed_share_mix(wbar, self.sigma_)
        # renormalising keeps the weights away from underflow; probabilities are unchanged
        self.weights_ = mixed / mixed.sum()
        self.loss_window_.append(pinball(theta, radius, self.alpha_))

        expert_errs = self.constructor_.misses(prediction, outcome, self.expert_thetas_)
        self.expert_thetas_ = self.expert_thetas_ + self.gammas_ * (expert_errs - (1 - self.alpha_))
