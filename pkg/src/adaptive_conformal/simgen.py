"""Seeded data generators and point predictors for the two simulation studies.

Random numbers come from NumPy's counter-based Philox generator keyed by the
seed; normal variates use NumPy's ziggurat transform. Streams are therefore
reproducible for a given seed on every platform that ships the same NumPy
bit-generator algorithms.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

log = logging.getLogger(__name__)

D_FLOOR = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class ArmaSpec:
    """ARMA(1, 1) noise ``e_t = psi e_{t-1} + xi_t + ma xi_{t-1}``.

    The innovation variance is ``scale_s * (1 - psi^2) / (1 + 2 psi ma + ma^2)``
    so the stationary variance equals ``scale_s``.
    """

    psi: float
    xi: float
    scale_s: float = 10.0
    length: int = 600
    burn_in: int = 100

    def __post_init__(self):
        if not abs(self.psi) < 1:
            raise ValueError(f"ARMA(1,1) needs |psi| < 1 for stationarity, got {self.psi}")
        if self.scale_s <= 0:
            raise ValueError("scale_s must be positive")
        if self.length < 1 or self.burn_in < 0:
            raise ValueError("length must be positive and burn_in nonnegative")

    @property
    def innovation_variance(self) -> float:
        psi, ma = self.psi, self.xi
        return self.scale_s * (1 - psi**2) / (1 + 2 * psi * ma + ma**2)


@dataclass(frozen=True)
class FriedmanSpec:
    length: int = 600
    feature_count: int = 6


@dataclass(frozen=True)
class ShiftSpec:
    length: int = 500
    base_sigma: float = 0.2
    shift_delta: float = 0.0
    shift_point: int = 250

    def sigmas(self) -> np.ndarray:
        t = np.arange(1, self.length + 1)
        return self.base_sigma + self.shift_delta * (t > self.shift_point)


def _arma_filter(spec: ArmaSpec, innovations: np.ndarray) -> np.ndarray:
    eps = lfilter([1.0, spec.xi], [1.0, -spec.psi], innovations)
    return eps[spec.burn_in:]


def gen_arma_noise(spec: ArmaSpec, seed=None, rng=None) -> np.ndarray:
    """ARMA(1, 1) noise started from the zero state, burn-in discarded."""
    rng = make_rng(seed) if rng is None else rng
    sd = math.sqrt(spec.innovation_variance)
    innovations = rng.normal(0.0, sd, size=spec.burn_in + spec.length)
    return _arma_filter(spec, innovations)


def friedman_mean(X) -> np.ndarray:
    """``10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5``; the sixth feature is ignored."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return (10 * np.sin(np.pi * X[:, 0] * X[:, 1]) + 20 * (X[:, 2] - 0.5) ** 2
            + 10 * X[:, 3] + 5 * X[:, 4])


@dataclass
class FriedmanData:
    X: np.ndarray
    mean: np.ndarray
    y: np.ndarray


def gen_friedman(spec: FriedmanSpec, arma: ArmaSpec, seed) -> FriedmanData:
    """Friedman regression targets with ARMA(1, 1) noise.

    Features are drawn first (``length x 6`` uniforms, row-major), then the
    innovations, all from the same seeded stream.
    """
    if arma.length != spec.length:
        arma = ArmaSpec(arma.psi, arma.xi, arma.scale_s, spec.length, arma.burn_in)
    rng = make_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(spec.length, spec.feature_count))
    mean = friedman_mean(X)
    noise = gen_arma_noise(arma, rng=rng)
    return FriedmanData(X=X, mean=mean, y=mean + noise)


def gen_shift_stream(spec: ShiftSpec, seed):
    """Zero-mean normal outcomes whose standard deviation jumps after ``shift_point``.

    Returns ``(mu_hat, y)`` with ``mu_hat`` identically zero.
    """
    rng = make_rng(seed)
    y = rng.standard_normal(spec.length) * spec.sigmas()
    return np.zeros(spec.length), y


def oracle_predictor(features) -> float | np.ndarray:
    """Exact Friedman mean for one feature row (scalar) or many rows (array)."""
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        if features.size != 6:
            raise ValueError("the Friedman mean needs exactly 6 features")
        return float(friedman_mean(features)[0])
    return friedman_mean(features)


class OnlineRidge:
    """Ridge regression on raw features (plus intercept), refit after every observation."""

    def __init__(self, n_features=6, penalty=1.0):
        self.penalty = penalty
        d = n_features + 1
        self._A = penalty * np.eye(d)
        self._A[0, 0] = 1e-8
        self._b = np.zeros(d)

    def predict(self, x) -> float:
        z = np.concatenate([[1.0], np.asarray(x, dtype=float)])
        coef = np.linalg.solve(self._A, self._b)
        return float(z @ coef)

    def observe(self, x, y) -> None:
        z = np.concatenate([[1.0], np.asarray(x, dtype=float)])
        self._A += np.outer(z, z)
        self._b += y * z


def ridge_predictions(X, y) -> np.ndarray:
    """One-step-ahead online ridge predictions: row ``t`` uses rows before ``t`` only."""
    model = OnlineRidge(n_features=X.shape[1])
    preds = np.empty(len(y))
    for t in range(len(y)):
        preds[t] = model.predict(X[t])
        model.observe(X[t], y[t])
    return preds


def estimate_D(residuals, window=None) -> float:
    """Maximum absolute residual over a 1-based inclusive ``window``.

    A zero maximum is floored at ``1e-9`` so that ``D / sqrt(3)`` stays a
    valid learning rate.
    """
    r = np.asarray(residuals, dtype=float)
    if window is not None:
        start, end = int(window[0]), int(window[1])
        if start < 1 or end > r.size or start > end:
            raise ValueError(f"calibration window {start}:{end} is empty or outside 1:{r.size}")
        r = r[start - 1:end]
    if r.size == 0:
        raise ValueError("calibration window is empty")
    D = float(np.max(np.abs(r)))
    if D <= 0:
        log.warning("estimated maximum radius is 0; flooring at %g", D_FLOOR)
        D = D_FLOOR
    return D
