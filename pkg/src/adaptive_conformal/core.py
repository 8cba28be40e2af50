"""Domain types and the predict-then-observe stream protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from ._validation import check_alpha, check_finite_scalar, check_gamma_grid, check_positive

METHODS = ("ACI", "AgACI", "FACI", "SF-OGD", "SAOCP")
CONSTRUCTORS = ("linear", "quantile")
DEFAULT_GAMMA_GRID = (0.001, 0.002, 0.004, 0.008, 0.016, 0.032, 0.064, 0.128)
DEFAULT_LIFETIME_MULTIPLIER = 8
DEFAULT_INTERVAL_LENGTH = 100


class ProtocolError(RuntimeError):
    """Raised when an outcome is supplied before its interval was requested."""


@dataclass(frozen=True)
class PredictionInterval:
    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval bounds must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.width)

    def __contains__(self, value: float) -> bool:
        # closed interval: endpoints count as covered
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class StreamStep:
    """One completed time step of an online interval algorithm.

    ``theta`` is NaN for methods that aggregate interval bounds directly
    (AgACI) and therefore have no single constructor parameter.
    """

    t: int
    prediction: float
    outcome: float
    interval: PredictionInterval
    err: int
    theta: float
    radius: float

    @property
    def covered(self) -> int:
        return 1 - self.err


def miss_indicator(interval: PredictionInterval, outcome: float) -> int:
    return 0 if outcome in interval else 1


@dataclass
class RunConfig:
    """Method choice plus tuning parameters.

    ``theta1`` defaults to ``alpha`` for the quantile constructor and to ``0``
    for the linear one. ``gamma_grid`` defaults to the doubling grid from
    0.001 to 0.128 and the SAOCP lifetime multiplier to 8.
    """

    method: str = "ACI"
    alpha: float = 0.9
    constructor: Optional[str] = None
    theta1: Optional[float] = None
    gamma: Optional[float] = None
    gamma_grid: Sequence[float] = field(default_factory=lambda: DEFAULT_GAMMA_GRID)
    D: Optional[float] = None
    lifetime_multiplier: int = DEFAULT_LIFETIME_MULTIPLIER
    interval_length: int = DEFAULT_INTERVAL_LENGTH

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        self.alpha = check_alpha(self.alpha)
        if self.constructor is None:
            self.constructor = default_constructor(self.method)
        if self.constructor not in CONSTRUCTORS:
            raise ValueError(f"unknown constructor {self.constructor!r}; expected one of {CONSTRUCTORS}")
        if self.gamma is not None:
            if self.method == "ACI":
                # a zero step freezes theta, which is a legitimate ACI baseline
                self.gamma = check_finite_scalar(self.gamma, "gamma")
                if self.gamma < 0:
                    raise ValueError(f"gamma must be nonnegative, got {self.gamma!r}")
            else:
                self.gamma = check_positive(self.gamma, "gamma")
        if self.D is not None:
            self.D = check_positive(self.D, "D")
        if self.theta1 is not None:
            self.theta1 = check_finite_scalar(self.theta1, "theta1")
        self.gamma_grid = tuple(float(g) for g in check_gamma_grid(self.gamma_grid))
        if int(self.lifetime_multiplier) < 1:
            raise ValueError("lifetime_multiplier must be a positive integer")
        if int(self.interval_length) < 1:
            raise ValueError("interval_length must be a positive integer")

    @property
    def resolved_theta1(self) -> float:
        return default_theta1(self.alpha, self.constructor) if self.theta1 is None else self.theta1

    def build(self):
        """Instantiate the configured (unfitted) estimator."""
        from .algorithms import make_estimator

        return make_estimator(self)


def default_constructor(method: str) -> str:
    """Interval constructor each method was originally presented with."""
    return "linear" if method in ("SF-OGD", "SAOCP") else "quantile"


def default_theta1(alpha: float, constructor: str) -> float:
    return alpha if constructor == "quantile" else 0.0


def run_stream(algorithm, pairs: Iterable[tuple[float, float]]) -> list[StreamStep]:
    """Drive ``algorithm`` through ``(prediction, outcome)`` pairs in order.

    The interval for step ``t`` is requested before the outcome of step ``t``
    is revealed, so it can only depend on data up to ``t - 1``.
    """
    steps = []
    for prediction, outcome in pairs:
        algorithm.predict_interval(prediction)
        steps.append(algorithm.update(outcome))
    if not steps:
        raise ValueError("run_stream needs at least one (prediction, outcome) pair")
    return steps


def steps_to_arrays(steps: Sequence[StreamStep]) -> dict[str, np.ndarray]:
    return {
        "t": np.array([s.t for s in steps], dtype=int),
        "prediction": np.array([s.prediction for s in steps]),
        "outcome": np.array([s.outcome for s in steps]),
        "lower": np.array([s.interval.lower for s in steps]),
        "upper": np.array([s.interval.upper for s in steps]),
        "err": np.array([s.err for s in steps], dtype=int),
        "theta": np.array([s.theta for s in steps]),
        "radius": np.array([s.radius for s in steps]),
    }
