"""Bayesian scalar-channel quantities: posterior means, MMSE and averaged Fisher information."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad

from ..constants import DEFAULTS
from ..errors import ContractViolation, QuadratureFailure
from .quadrature import standard_normal_rule

if TYPE_CHECKING:
    from ..models.base_channel import BaseChannel
    from ..models.base_prior import BasePrior

_MMSE_HALF_WIDTH = 40.0


def scalar_posterior_mean(prior: BasePrior, lam, h):
    """``E[s | s + sqrt(lam) w = h]`` for ``s ~ prior``; exactly ``h`` when ``lam == 0``."""
    return prior.posterior_mean(lam, h)


def scalar_mmse_error(prior: BasePrior, q_h: float) -> float:
    """``E[(E[s|h] - s)^2]`` for ``h = s + sqrt(q_h) w``.

    Computed as the integral of the posterior variance against the marginal density of ``h``, on
    the standardised variable ``t = h / sqrt(variance + q_h)``.
    """
    if not q_h > 0.0:
        raise ContractViolation(f"q_h must be positive, got {q_h}")
    sd = np.sqrt(prior.variance + q_h)

    def integrand(t):
        h = sd * t
        moments = prior.smoothed_moments(q_h, h)
        return float(np.exp(moments.log_norm) * moments.var) * sd

    value, _ = quad(integrand, -_MMSE_HALF_WIDTH, _MMSE_HALF_WIDTH, points=[0.0], limit=400, epsabs=1e-14)
    if not np.isfinite(value):
        raise QuadratureFailure(f"MMSE integral of {prior.name} at q_h={q_h} is not finite")
    return float(min(max(value, 0.0), prior.variance))


def avg_fisher_info(
    channel: BaseChannel, q_smooth: float, eta_var: float, n: int = DEFAULTS.HERMITE_NODES
) -> float:
    """``-E[d^2/d eta^2 log P_y(y | eta, q_smooth)]``.

    The average is over ``eta ~ N(0, eta_var)`` and ``y | eta ~ P_y(y | eta, q_smooth)``; the latter is
    integrated by the channel's predictive rule (exact sums for binary outputs).
    """
    if eta_var < 0.0:
        raise ContractViolation(f"eta variance must be nonnegative, got {eta_var}")
    if q_smooth < 0.0:
        raise ContractViolation(f"Smoothing variance must be nonnegative, got {q_smooth}")
    nodes, log_weights = standard_normal_rule(n)
    eta = np.sqrt(eta_var) * nodes
    y, weights = channel.predictive_quadrature(eta, q_smooth, n)
    eta_b = np.broadcast_to(eta[:, None], y.shape)
    curvature = channel.curvature(y, eta_b, q_smooth)
    inner = np.sum(weights * curvature, axis=-1)
    value = -np.sum(np.exp(log_weights) * inner)
    if not np.isfinite(value):
        raise QuadratureFailure(f"Fisher information of {channel.name} at q={q_smooth} is not finite")
    return float(value)
