from .aci import ACI, AciState, aci_step
from .agaci import AgACI
from .base import OnlineIntervalEstimator
from .boa import BoaCombiner, boa_combine, boa_update
from .faci import FACI, exponential_reweight, faci_eta_default, faci_eta_online, fixed_share_mix
from .pinball import pinball, pinball_subgradient, quantile_loss
from .saocp import SAOCP, saocp_active_set, saocp_lifetime, saocp_prior
from .sfogd import SFOGD, SfOgdState, sfogd_step

ESTIMATORS = {"ACI": ACI, "AgACI": AgACI, "FACI": FACI, "SF-OGD": SFOGD, "SAOCP": SAOCP}


def make_estimator(config):
    """Build an unfitted estimator from a :class:`~adaptive_conformal.core.RunConfig`."""
    common = dict(alpha=config.alpha, constructor=config.constructor, theta1=config.theta1)
    if config.method == "ACI":
        gamma = config.gamma if config.gamma is not None else 0.01
        return ACI(gamma=gamma, **common)
    if config.method == "AgACI":
        return AgACI(gamma_grid=config.gamma_grid, **common)
    if config.method == "FACI":
        return FACI(gamma_grid=config.gamma_grid, interval_length=config.interval_length, **common)
    if config.method == "SF-OGD":
        return SFOGD(gamma=config.gamma, D=config.D, **common)
    return SAOCP(gamma=config.gamma, D=config.D, lifetime_multiplier=config.lifetime_multiplier, **common)


__all__ = [
    "ACI", "AgACI", "FACI", "SFOGD", "SAOCP", "OnlineIntervalEstimator", "ESTIMATORS", "make_estimator",
    "AciState", "SfOgdState", "BoaCombiner", "aci_step", "sfogd_step", "boa_combine", "boa_update",
    "pinball", "pinball_subgradient", "quantile_loss", "faci_eta_default", "faci_eta_online",
    "exponential_reweight", "fixed_share_mix", "saocp_lifetime", "saocp_prior", "saocp_active_set",
]
