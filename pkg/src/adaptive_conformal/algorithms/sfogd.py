"""Scale-free online gradient descent on the pinball loss."""

import math
from dataclasses import dataclass

from .base import OnlineIntervalEstimator, resolve_step_size
from .pinball import pinball_subgradient


@dataclass
class SfOgdState:
    theta: float
    gamma: float
    grad_sq_sum: float = 0.0


def sfogd_step(state: SfOgdState, theta_used: float, r: float, err: int, alpha: float) -> SfOgdState:
    """One scale-free step.

    The squared norm of the current gradient is added to the running sum
    before dividing, so the denominator is never zero (``|g|`` is either
    ``alpha`` or ``1 - alpha``).
    """
    g = pinball_subgradient(theta_used, r, err, alpha)
    grad_sq_sum = state.grad_sq_sum + g * g
    theta = state.theta - state.gamma * g / math.sqrt(grad_sq_sum)
    return SfOgdState(theta, state.gamma, grad_sq_sum)


class SFOGD(OnlineIntervalEstimator):
    """Scale-free online gradient descent (SF-OGD).

    Parameters
    ----------
    gamma : float, optional
        Learning rate; defaults to ``D / sqrt(3)``.
    D : float, optional
        Assumed maximum radius, used only to default ``gamma``.
    alpha : float
    constructor : {"linear", "quantile"}
    theta1 : float, optional
    """

    def __init__(self, gamma=None, D=None, alpha=0.9, constructor="linear", theta1=None, score_fn=None):
        super().__init__(alpha=alpha, constructor=constructor, theta1=theta1, score_fn=score_fn)
        self.gamma = gamma
        self.D = D

    def _init_state(self):
        gamma, self.D_ = resolve_step_size(self.gamma, self.D, self.constructor)
        self.state_ = SfOgdState(self._resolved_theta1(), gamma)

    def _propose(self, prediction, commit=True):
        theta = self.state_.theta
        return self.constructor_.interval(prediction, theta), theta

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        self.state_ = sfogd_step(self.state_, theta, radius, err, self.alpha_)

    @property
    def theta_(self):
        return self.state_.theta
