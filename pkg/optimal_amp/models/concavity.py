"""Numerical log-concavity checks used to guard the optimal-estimator construction."""

from __future__ import annotations

import logging

import numpy as np

from ..constants import DEFAULTS
from ..errors import ContractViolation
from ..scalar.functions import ScalarFunction
from .base_channel import BaseChannel
from .base_prior import BasePrior

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 101


def check_log_concavity(
    f: ScalarFunction,
    lower: float,
    upper: float,
    count: int = DEFAULTS.GRID_POINTS,
    tol: float = DEFAULTS.CONCAVITY_TOL,
) -> bool:
    """Return True iff the discrete second derivative of ``f`` is at most ``tol`` on the grid.

    Args:
        f: A log-density (or log-likelihood in ``z``).
        lower: Left end of the grid.
        upper: Right end of the grid.
        count: Number of grid points, at least 101.
        tol: Allowed positive curvature.
    """
    if count < MIN_GRID_POINTS:
        raise ContractViolation(f"Log-concavity grid needs at least {MIN_GRID_POINTS} points, got {count}")
    if not upper > lower:
        raise ContractViolation(f"Empty log-concavity grid [{lower}, {upper}]")
    x = np.linspace(lower, upper, count)
    step = x[1] - x[0]
    values = f.eval(x)
    if not np.all(np.isfinite(values)):
        return False
    second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / step**2
    worst = float(second.max())
    if worst > tol:
        logger.debug(f"{f.name} is not log-concave: second difference {worst:.3g} at x={x[1 + second.argmax()]:.4g}")
        return False
    return True


def prior_grid_half_width(prior: BasePrior) -> float:
    return DEFAULTS.GRID_HALF_WIDTH_FACTOR * max(1.0, np.sqrt(prior.variance))


def is_log_concave_prior(prior: BasePrior, count: int = DEFAULTS.GRID_POINTS) -> bool:
    half = prior_grid_half_width(prior)
    return check_log_concavity(prior.log_density, -half, half, count)


def is_log_concave_channel(
    channel: BaseChannel, y_values=None, half_width: float = 20.0, count: int = DEFAULTS.GRID_POINTS
) -> bool:
    """Log-concavity in ``z`` for every output in ``y_values`` (the alphabet for binary channels)."""
    if y_values is None:
        y_values = channel.output_alphabet if channel.is_binary else np.linspace(-half_width, half_width, 9)
    return all(
        check_log_concavity(channel.likelihood_function(float(y)), -half_width, half_width, count) for y in y_values
    )
