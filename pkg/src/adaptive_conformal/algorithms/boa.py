"""Bernstein Online Aggregation with per-expert adaptive learning rates.

Each expert ``k`` accumulates its centred loss ``l_k - sum_j p_j l_j`` (the
instantaneous regret of the mixture against expert ``k``) and the square of
it. With

    eta_k = min(1 / E_k, sqrt(log K / V_k)),

where ``E_k`` is the largest centred loss magnitude seen so far and ``V_k``
the cumulative squared centred loss, the weights are

    w_k  proportional to  pi_k * exp(-eta_k * S_k - eta_k**2 * V_k),

with ``S_k`` the cumulative centred loss. The quadratic term is the
second-order (Bernstein) correction. Losses are quantile losses at the
combiner's level, so the combiner tracks that quantile of the outcome.
"""

from __future__ import annotations

import math

import numpy as np

from .pinball import quantile_loss


class BoaCombiner:
    def __init__(self, n_experts, quantile_level, prior=None):
        if n_experts < 1:
            raise ValueError("BOA needs at least one expert")
        if not 0 < quantile_level < 1:
            raise ValueError(f"quantile_level must lie in (0, 1), got {quantile_level!r}")
        self.n_experts = int(n_experts)
        self.quantile_level = float(quantile_level)
        if prior is None:
            prior = np.full(self.n_experts, 1.0 / self.n_experts)
        prior = np.asarray(prior, dtype=float)
        self.prior = prior / prior.sum()
        self.cum_regret = np.zeros(self.n_experts)
        self.cum_sq = np.zeros(self.n_experts)
        self.loss_range = np.zeros(self.n_experts)
        self.weights = self.prior.copy()

    def learning_rates(self):
        """Per-expert rates; ``inf`` until an expert has a nonzero centred loss."""
        log_k = math.log(self.n_experts)
        with np.errstate(divide="ignore", invalid="ignore"):
            by_range = np.where(self.loss_range > 0, 1.0 / self.loss_range, np.inf)
            by_var = np.where(self.cum_sq > 0, np.sqrt(log_k / self.cum_sq), np.inf)
        return np.minimum(by_range, by_var)

    def combine(self, expert_predictions, mask=None):
        """Weighted mean of the expert predictions.

        ``mask`` restricts the mixture to a subset of experts (weights are
        renormalised over it).
        """
        x = np.asarray(expert_predictions, dtype=float)
        w = self.weights if mask is None else np.where(mask, self.weights, 0.0)
        total = w.sum()
        if total <= 0:
            w = self.prior if mask is None else np.where(mask, self.prior, 0.0)
            total = w.sum()
        if mask is not None:
            x = np.where(mask, x, 0.0)
        return float(w @ x / total)

    def update(self, expert_predictions, outcome):
        x = np.asarray(expert_predictions, dtype=float)
        losses = quantile_loss(x, outcome, self.quantile_level)
        centred = np.atleast_1d(losses - self.weights @ losses)
        self.cum_regret += centred
        self.cum_sq += centred**2
        self.loss_range = np.maximum(self.loss_range, np.abs(centred))
        self._refresh_weights()
        return self

    def _refresh_weights(self):
        eta = self.learning_rates()
        active = self.cum_sq > 0
        exponent = np.zeros(self.n_experts)
        e = eta[active]
        exponent[active] = -e * self.cum_regret[active] - e * e * self.cum_sq[active]
        exponent -= exponent.max()
        w = self.prior * np.exp(exponent)
        self.weights = w / w.sum()


def boa_combine(combiner: BoaCombiner, expert_predictions) -> float:
    return combiner.combine(expert_predictions)


def boa_update(combiner: BoaCombiner, expert_predictions, outcome) -> BoaCombiner:
    return combiner.update(expert_predictions, outcome)
