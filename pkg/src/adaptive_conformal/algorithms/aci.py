"""Adaptive Conformal Inference: subgradient descent on the pinball loss."""

from dataclasses import dataclass

from .._validation import check_positive
from .base import OnlineIntervalEstimator


@dataclass
class AciState:
    theta: float
    gamma: float


def aci_step(state: AciState, err: int, alpha: float) -> AciState:
    """``theta <- theta + gamma * (err - (1 - alpha))``."""
    return AciState(state.theta + state.gamma * (err - (1 - alpha)), state.gamma)


class ACI(OnlineIntervalEstimator):
    """Adaptive conformal inference with a fixed learning rate.

    Parameters
    ----------
    gamma : float
        Learning rate. Larger values react faster but oscillate more.
    alpha : float
        Target coverage in (0, 1).
    constructor : {"quantile", "linear"}
    theta1 : float, optional
        Starting value; ``alpha`` for the quantile constructor and ``0`` for
        the linear constructor when omitted.
    score_fn : callable, optional
        Custom nonconformity score for the quantile constructor.
    """

    def __init__(self, gamma=0.01, alpha=0.9, constructor="quantile", theta1=None, score_fn=None):
        super().__init__(alpha=alpha, constructor=constructor, theta1=theta1, score_fn=score_fn)
        self.gamma = gamma

    def _init_state(self):
        gamma = float(self.gamma)
        if gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {gamma!r}")
        self.state_ = AciState(self._resolved_theta1(), gamma)

    def _propose(self, prediction, commit=True):
        theta = self.state_.theta
        return self.constructor_.interval(prediction, theta), theta

    def _learn(self, prediction, outcome, interval, theta, radius, err):
        self.state_ = aci_step(self.state_, err, self.alpha_)

    @property
    def theta_(self):
        return self.state_.theta
