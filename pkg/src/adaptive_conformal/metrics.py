"""Evaluation metrics over completed runs.

All metrics take an explicit evaluation range ``(start, end)`` of 1-based,
inclusive time indices; ``None`` means the whole run. Infinite interval
widths are excluded from width averages and path lengths and counted
separately instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algorithms.pinball import pinball
from .core import StreamStep


class MetricError(ValueError):
    pass


def _slice(values, eval_range):
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if eval_range is None:
        start, end = 1, n
    else:
        start, end = int(eval_range[0]), int(eval_range[1])
    if start < 1 or end > n or start > end:
        raise MetricError(f"evaluation range {start}:{end} is empty or outside 1:{n}")
    return values[start - 1:end]


def _errs(steps_or_errs):
    if len(steps_or_errs) and isinstance(steps_or_errs[0], StreamStep):
        return np.array([s.err for s in steps_or_errs], dtype=float)
    return np.asarray(steps_or_errs, dtype=float)


def _widths(steps_or_widths):
    if len(steps_or_widths) and isinstance(steps_or_widths[0], StreamStep):
        return np.array([s.interval.width for s in steps_or_widths])
    return np.asarray(steps_or_widths, dtype=float)


def empirical_coverage(errs, eval_range=None):
    """Fraction of steps whose outcome fell inside the interval.

    ``errs`` may be a sequence of miss indicators or of :class:`StreamStep`.
    """
    return float(np.mean(1.0 - _slice(_errs(errs), eval_range)))


def coverage_error(errs, alpha, eval_range=None):
    """Empirical coverage minus ``alpha``; negative means undercoverage."""
    return empirical_coverage(errs, eval_range) - alpha


def mean_width(widths, eval_range=None):
    """Mean of the finite widths and the number of infinite ones."""
    w = _slice(_widths(widths), eval_range)
    finite = np.isfinite(w)
    n_inf = int((~finite).sum())
    if not finite.any():
        raise MetricError(f"mean width undefined: all {n_inf} widths in range are infinite")
    return float(w[finite].mean()), n_inf


def path_length(widths, eval_range=None):
    """Total variation of the widths; pairs touching an infinite width are skipped."""
    w = _slice(_widths(widths), eval_range)
    if w.size < 2:
        raise MetricError("path length needs at least two steps")
    ok = np.isfinite(w[1:]) & np.isfinite(w[:-1])
    return float(np.abs(np.diff(np.where(np.isfinite(w), w, 0.0)))[ok].sum())


def best_fixed_theta(radii, alpha):
    """Exact minimiser of ``sum_t pinball(theta, r_t)`` over constant ``theta``.

    The objective is piecewise linear with kinks at the radii, so it is
    evaluated at every distinct radius using prefix sums. Returns
    ``(theta_star, loss)`` with the smallest minimising radius.
    """
    r = np.sort(np.asarray(radii, dtype=float))
    n = r.size
    if n == 0:
        raise MetricError("best_fixed_theta needs at least one radius")
    candidates = np.unique(r)
    prefix = np.concatenate([[0.0], np.cumsum(r)])
    # number of radii <= candidate
    below = np.searchsorted(r, candidates, side="right")
    sum_below = prefix[below]
    sum_above = prefix[n] - sum_below
    over = below * candidates - sum_below
    under = sum_above - (n - below) * candidates
    losses = (1 - alpha) * over + alpha * under
    best = losses.min()
    # on a flat segment, rounding should not decide which end is reported
    j = int(np.flatnonzero(losses <= best + 1e-12 * max(1.0, abs(best)))[0])
    return float(candidates[j]), float(max(best, 0.0))


def cumulative_loss(thetas, radii, alpha):
    return float(np.sum(pinball(np.asarray(thetas, dtype=float), np.asarray(radii, dtype=float), alpha)))


def _check_pair(thetas, radii):
    thetas = np.asarray(thetas, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if thetas.shape != radii.shape:
        raise MetricError(f"thetas and radii differ in length ({thetas.size} vs {radii.size})")
    return thetas, radii


def regret(thetas, radii, alpha):
    """Cumulative pinball loss minus that of the best fixed parameter (signed)."""
    thetas, radii = _check_pair(thetas, radii)
    if thetas.size == 0:
        raise MetricError("regret needs at least one step")
    return cumulative_loss(thetas, radii, alpha) - best_fixed_theta(radii, alpha)[1]


def strongly_adaptive_regret(thetas, radii, alpha, m):
    """Largest regret over all contiguous windows of length ``m`` (brute force)."""
    thetas, radii = _check_pair(thetas, radii)
    T = thetas.size
    if not 1 <= m <= T:
        raise MetricError(f"window length {m} outside 1:{T}")
    losses = np.atleast_1d(pinball(thetas, radii, alpha))
    best = -math.inf
    for tau in range(T - m + 1):
        # summed the same way as cumulative_loss so that m == T reproduces regret() exactly
        window_loss = float(np.sum(losses[tau:tau + m]))
        value = window_loss - best_fixed_theta(radii[tau:tau + m], alpha)[1]
        best = max(best, value)
    return float(best)


@dataclass
class RunReport:
    empirical_coverage: float
    coverage_error: float
    mean_width: float
    infinite_width_count: int
    path_length: float
    regret: float
    sa_regret: dict = field(default_factory=dict)
    eval_start: int = 1
    eval_end: int = 1

    def to_dict(self):
        """Flat key-value form; ``sa_regret`` expands to ``sa_regret.<m>`` keys."""
        out = {
            "empirical_coverage": self.empirical_coverage,
            "coverage_error": self.coverage_error,
            "mean_width": self.mean_width,
            "infinite_width_count": self.infinite_width_count,
            "path_length": self.path_length,
            "regret": self.regret,
        }
        for m in sorted(self.sa_regret):
            out[f"sa_regret.{m}"] = self.sa_regret[m]
        out["eval_start"] = self.eval_start
        out["eval_end"] = self.eval_end
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}


def run_report(errs, widths, thetas, radii, alpha, eval_range=None, sa_windows: Sequence[int] = ()):
    """Compute every metric over ``eval_range``.

    Regret-type metrics are NaN when ``thetas`` contains NaN (methods that
    aggregate bounds directly have no parameter sequence). The mean width is
    NaN when every width in range is infinite. Window lengths
    longer than the evaluation range are skipped.
    """
    n = len(errs)
    start, end = (1, n) if eval_range is None else (int(eval_range[0]), int(eval_range[1]))
    rng = (start, end)
    th = _slice(thetas, rng)
    rr = _slice(radii, rng)
    w = _slice(_widths(widths), rng)
    n_inf = int((~np.isfinite(w)).sum())
    mw = mean_width(w)[0] if n_inf < w.size else math.nan
    has_theta = bool(np.all(np.isfinite(th)))
    sa = {}
    for m in sa_windows:
        if m <= th.size:
            sa[int(m)] = strongly_adaptive_regret(th, rr, alpha, int(m)) if has_theta else math.nan
    return RunReport(
        empirical_coverage=empirical_coverage(errs, rng),
        coverage_error=coverage_error(errs, alpha, rng),
        mean_width=mw,
        infinite_width_count=n_inf,
        path_length=path_length(widths, rng) if end > start else 0.0,
        regret=regret(th, rr, alpha) if has_theta else math.nan,
        sa_regret=sa,
        eval_start=start,
        eval_end=end,
    )


def report_from_steps(steps, alpha, eval_range=None, sa_windows=()):
    return run_report(
        [s.err for s in steps],
        [s.interval.width for s in steps],
        [s.theta for s in steps],
        [s.radius for s in steps],
        alpha,
        eval_range=eval_range,
        sa_windows=sa_windows,
    )
