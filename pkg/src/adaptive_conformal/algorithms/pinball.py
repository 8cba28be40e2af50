"""Pinball loss on the radius scale and its subgradient.

``alpha`` is the target coverage. Overshooting the radius (``theta >= r``)
costs ``1 - alpha`` per unit and undershooting costs ``alpha`` per unit, so
the loss is minimised at the ``alpha``-quantile of the radii and
``1 - alpha - err`` is always a subgradient at ``theta``.
"""

import numpy as np


def pinball(theta, r, alpha):
    """Pinball loss ``L(theta, r)``; works elementwise on arrays."""
    diff = np.subtract(theta, r)
    loss = np.where(diff >= 0, (1 - alpha) * diff, -alpha * diff)
    if np.ndim(loss) == 0:
        return float(loss)
    return loss


def pinball_subgradient(theta, r, err, alpha):
    """Subgradient ``1 - alpha - err`` of ``pinball`` at ``theta``.

    ``theta`` and ``r`` are accepted for symmetry with :func:`pinball`; the
    value only depends on whether the interval missed.
    """
    return 1.0 - alpha - err


def quantile_loss(prediction, outcome, level):
    """Standard quantile (check) loss of ``prediction`` at quantile ``level``."""
    u = np.subtract(outcome, prediction)
    loss = np.where(u >= 0, level * u, (level - 1) * u)
    if np.ndim(loss) == 0:
        return float(loss)
    return loss
