"""Input validation helpers shared by the estimators and the CLI."""

import math

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_alpha(alpha):
    """Return ``alpha`` as a float, raising if it is not in the open unit interval."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def check_positive(value, name):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_finite_scalar(value, name):
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_gamma_grid(grid):
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("gamma_grid must contain at least one learning rate")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise ValueError("gamma_grid entries must be positive and finite")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("gamma_grid must be strictly increasing")
    return grid


def check_stream(y, mu_hat):
    """Validate a pair of outcome / point-prediction sequences.

    Both are coerced to 1-D float arrays; non-finite entries are rejected
    eagerly so they never reach the online state.
    """
    y = check_array(np.asarray(y, dtype=float), ensure_2d=False, dtype=float,
                    input_name="y")
    mu_hat = check_array(np.asarray(mu_hat, dtype=float), ensure_2d=False,
                         dtype=float, input_name="mu_hat")
    if y.ndim != 1 or mu_hat.ndim != 1:
        raise ValueError("y and mu_hat must be one-dimensional")
    check_consistent_length(y, mu_hat)
    return y, mu_hat
