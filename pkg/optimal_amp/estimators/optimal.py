"""Optimal loss and regulariser by Moreau inversion of Gaussian-smoothed log-densities.

With smoothing variance ``lam``, the optimal regulariser is ``-M_lam[log P_s(., lam)]`` and the
optimal loss is ``-M_lam[log P_y(y | ., lam)]``; at ``lam = 0`` both reduce to the MAP functions.
All tables are anchored so that their minimum over the grid is zero.
"""

from __future__ import annotations

import logging

import numpy as np

from ..constants import DEFAULTS
from ..errors import ContractViolation, DeconvolutionError
from ..models.base_channel import BaseChannel
from ..models.base_prior import BasePrior
from ..models.concavity import is_log_concave_channel, is_log_concave_prior, prior_grid_half_width
from ..scalar.functions import ScalarFunction
from ..scalar.proximal import moreau, moreau_grad, prox_derivative
from .families import BinaryLossFamily, GridLossFamily, LossFamily
from .tabulated import TabulatedFunction, symmetric_grid

logger = logging.getLogger(__name__)

DECONVOLUTION_MARGIN = 1e-6


def loss_grid_half_width(prior_variance: float, gamma: float = DEFAULTS.GAMMA) -> float:
    return DEFAULTS.GRID_HALF_WIDTH_FACTOR * max(1.0, np.sqrt(gamma * prior_variance))


def _check_deconvolution(curvature: np.ndarray, lam: float, name: str):
    lowest = float(np.min(curvature))
    if lowest <= -1.0 / lam + DECONVOLUTION_MARGIN:
        raise DeconvolutionError(
            f"Moreau inversion of {name} at lambda={lam} is near-singular: curvature {lowest:.6g} "
            f"is within {DECONVOLUTION_MARGIN} of -1/lambda"
        )


def _finish(values: np.ndarray, grid: np.ndarray, kinks, name: str) -> TabulatedFunction:
    table = TabulatedFunction(grid, values - values.min(), kinks=kinks, name=name)
    if not table.is_convex():
        worst = table.second_differences().min()
        logger.warning(f"Constructed {name} is not convex: min second difference {worst:.3g}")
    return table


def _inverted_envelope(logf: ScalarFunction, lam: float, grid: np.ndarray) -> np.ndarray:
    """``-M_lam[logf]`` on the grid for a concave ``logf`` with curvature above ``-1/lam``."""
    _check_deconvolution(logf.second_deriv(grid), lam, logf.name)
    return -moreau(logf, lam, grid)


def construct_optimal_regularizer(
    prior: BasePrior,
    lambda_h: float,
    grid: np.ndarray | None = None,
    count: int = DEFAULTS.GRID_POINTS,
) -> TabulatedFunction:
    """Tabulate ``sigma_opt(h) = -M_{lambda_h}[log P_s(., lambda_h)](h)``.

    Args:
        prior: A log-concave prior.
        lambda_h: Signal-side smoothing variance; zero gives the MAP regulariser ``-log P_s``.
        grid: Knots; defaults to ``count`` points on ``+-12 max(1, sigma_s)``.
        count: Number of knots of the default grid.

    Raises:
        ContractViolation: If the prior is not log-concave or ``lambda_h < 0``.
        DeconvolutionError: If the smoothed log-density is too close to the ``-1/lambda_h`` curvature bound.
    """
    if lambda_h < 0.0:
        raise ContractViolation(f"lambda_h must be nonnegative, got {lambda_h}")
    if not is_log_concave_prior(prior):
        raise ContractViolation(f"Prior {prior!r} is not log-concave; the optimal regularizer is undefined")
    if grid is None:
        grid = symmetric_grid(prior_grid_half_width(prior), count)
    name = f"regularizer[{prior.name}, lambda_h={lambda_h:g}]"
    if lambda_h == 0.0:
        return _finish(-prior.log_density.eval(grid), grid, prior.log_density.kinks, name)
    values = _inverted_envelope(prior.smoothed_log_density(lambda_h), lambda_h, grid)
    return _finish(values, grid, (), name)


def construct_optimal_loss(
    channel: BaseChannel,
    y: float,
    lambda_eta: float,
    grid: np.ndarray | None = None,
    count: int = DEFAULTS.GRID_POINTS,
    prior_variance: float = 1.0,
    gamma: float = DEFAULTS.GAMMA,
) -> TabulatedFunction:
    """Tabulate ``L_opt(y, eta) = -M_{lambda_eta}[log P_y(y | ., lambda_eta)](eta)`` at a fixed output.

    Without ``grid`` the table spans ``eta`` over :func:`loss_grid_half_width` of ``gamma * prior_variance``.
    """
    if lambda_eta < 0.0:
        raise ContractViolation(f"lambda_eta must be nonnegative, got {lambda_eta}")
    if not is_log_concave_channel(channel, [y]):
        raise ContractViolation(f"Channel {channel!r} is not log-concave at y={y}; the optimal loss is undefined")
    if grid is None:
        grid = symmetric_grid(loss_grid_half_width(prior_variance, gamma), count)
    name = f"loss[{channel.name}, y={y:g}, lambda_eta={lambda_eta:g}]"
    if lambda_eta == 0.0:
        return _finish(-channel.log_likelihood(y, grid), grid, (), name)
    values = _inverted_envelope(channel.smoothed_likelihood_function(y, lambda_eta), lambda_eta, grid)
    return _finish(values, grid, (), name)


def construct_optimal_loss_family(
    channel: BaseChannel,
    lambda_eta: float,
    y_observed=None,
    grid: np.ndarray | None = None,
    count: int = DEFAULTS.GRID_POINTS,
    y_count: int = DEFAULTS.Y_GRID_POINTS,
    y_margin: float = DEFAULTS.Y_GRID_MARGIN,
    prior_variance: float = 1.0,
    gamma: float = DEFAULTS.GAMMA,
) -> LossFamily:
    """Optimal losses for every output a run can see.

    Binary channels get one table per symbol. Continuous channels get ``y_count`` rows on a
    ``y``-grid spanning the observed outputs widened by ``y_margin`` of their range on each side.
    The default ``eta`` grid is sized from ``gamma * prior_variance``.
    """
    if grid is None:
        grid = symmetric_grid(loss_grid_half_width(prior_variance, gamma), count)
    family_name = f"loss[{channel.name}, lambda_eta={lambda_eta:g}]"
    if channel.is_binary:
        tables = {y: construct_optimal_loss(channel, y, lambda_eta, grid) for y in channel.output_alphabet}
        return BinaryLossFamily(tables, name=family_name)

    if y_observed is None or np.size(y_observed) == 0:
        raise ContractViolation("A continuous channel loss family needs observed outputs to size its y-grid")
    y_lo, y_hi = float(np.min(y_observed)), float(np.max(y_observed))
    spread = max(y_hi - y_lo, 1.0)
    y_grid = np.linspace(y_lo - y_margin * spread, y_hi + y_margin * spread, y_count)
    if lambda_eta < 0.0:
        raise ContractViolation(f"lambda_eta must be nonnegative, got {lambda_eta}")
    if not is_log_concave_channel(channel, y_grid[[0, y_count // 2, -1]]):
        raise ContractViolation(f"Channel {channel!r} is not log-concave; the optimal loss is undefined")

    # all rows at once: a function of eta bound element-wise to the row outputs
    y_rows = np.broadcast_to(y_grid[:, None], (y_count, grid.size))
    eta_rows = np.broadcast_to(grid, (y_count, grid.size))
    if lambda_eta == 0.0:
        values = -channel.log_likelihood(y_rows, eta_rows)
    else:
        bound = ScalarFunction(
            fn=lambda eta: channel.smoothed_log_likelihood(y_rows, eta, lambda_eta),
            dfn=lambda eta: channel.score(y_rows, eta, lambda_eta),
            d2fn=lambda eta: channel.curvature(y_rows, eta, lambda_eta),
            name=family_name,
        )
        values = _inverted_envelope(bound, lambda_eta, eta_rows)
    tables = [_finish(row, grid, (), f"{family_name}[y={y:g}]") for y, row in zip(y_grid, values)]
    return GridLossFamily(y_grid, tables, name=family_name)


def map_loss_family(channel: BaseChannel, y_observed=None, grid=None) -> LossFamily:
    return construct_optimal_loss_family(channel, 0.0, y_observed, grid)


def envelope_function(f: ScalarFunction, q: float) -> ScalarFunction:
    """``M_q[f]`` as a function object with derivatives from the proximal map."""

    def dfn(x):
        return moreau_grad(f, q, x)

    def d2fn(x):
        return (1.0 - prox_derivative(f, q, x)) / q

    return ScalarFunction(fn=lambda x: moreau(f, q, x), dfn=dfn, d2fn=d2fn, name=f"M_{q:g}[{f.name}]")


def verify_moreau_inversion(f: ScalarFunction, q: float, grid) -> float:
    """Sup-norm error of recovering a convex ``f`` from its Moreau envelope.

    The envelope ``g = M_q[f]`` has curvature at most ``1/q``, so ``-M_q[-g]`` is well posed and equals
    ``f``; this is the same inversion the optimal-estimator construction applies to smoothed log-densities.
    """
    if not q > 0.0:
        raise ContractViolation(f"Moreau scale must be positive, got {q}")
    grid = np.asarray(grid, dtype=float)
    g = envelope_function(f, q)
    neg_g = ScalarFunction(
        fn=lambda x: -g.eval(x),
        dfn=lambda x: -g.deriv(x),
        d2fn=lambda x: -g.second_deriv(x),
        name=f"-{g.name}",
    )
    recovered = -moreau(neg_g, q, grid)
    return float(np.max(np.abs(recovered - f.eval(grid))))


def _aligned_error(lhs: np.ndarray, rhs: np.ndarray, grid: np.ndarray) -> float:
    centre = int(np.argmin(np.abs(grid)))
    diff = lhs - rhs
    return float(np.max(np.abs(diff - diff[centre])))


def roundtrip_check(
    model: BasePrior | BaseChannel,
    lam: float,
    table: TabulatedFunction | None = None,
    y: float | None = None,
    check_grid=None,
) -> float:
    """Sup-norm residual of the Moreau-matching condition for a constructed optimal function.

    For a prior this is ``M_lam[sigma_opt] = -log P_s(., lam)``; for a channel at output ``y`` it is
    ``M_lam[L_opt(y, .)] = -log P_y(y | ., lam)``. Additive constants are aligned at the grid point
    nearest zero. At ``lam = 0`` the residual is the interpolation error against the raw negative
    log-density, measured between the knots.
    """
    is_prior = isinstance(model, BasePrior)
    if not is_prior and y is None:
        raise ContractViolation("roundtrip_check on a channel needs the output y")
    if table is None:
        table = construct_optimal_regularizer(model, lam) if is_prior else construct_optimal_loss(model, y, lam)

    if check_grid is None:
        if lam == 0.0:
            check_grid = 0.5 * (table.grid[1:] + table.grid[:-1])
            check_grid = check_grid[np.abs(check_grid) <= 8.0]
        else:
            check_grid = np.linspace(-8.0, 8.0, 201)
    check_grid = np.asarray(check_grid, dtype=float)

    if is_prior:
        target = -model.log_smoothed(lam, check_grid)
    else:
        target = -model.smoothed_log_likelihood(y, check_grid, lam)
    if lam == 0.0:
        return _aligned_error(table.eval(check_grid), target, check_grid)
    envelope = moreau(table.to_function(), lam, check_grid)
    return _aligned_error(envelope, target, check_grid)


def smoothed_curvature_at_minimum(table: TabulatedFunction) -> float:
    """Discrete second difference of the table at its minimising knot."""
    i = int(np.clip(np.argmin(table.values), 1, table.values.size - 2))
    return float(table.values[i + 1] - 2.0 * table.values[i] + table.values[i - 1])
