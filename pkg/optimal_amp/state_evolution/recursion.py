"""Scalar state evolution of Bayesian AMP.

With ``eta ~ N(0, gamma sigma^2 - q_eta)``, ``z | eta ~ N(eta, q_eta)`` and ``y | z`` from the channel,
one step maps::

    q_h      = 1 / (alpha gamma J(q_eta))          J = -E[d^2/d eta^2 log P_y(y | eta, q_eta)]
    q_eta'   = gamma mmse(q_h)                     mmse for s + sqrt(q_h) w, s ~ prior

and the engine's smoothing parameters are identified as ``lambda_eta = q_eta`` and ``lambda_h = q_h``.
Expectations are computed by quadrature, or by Monte Carlo with common random numbers across steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from ..constants import DEFAULTS, RNG_ROLES
from ..data.generate import make_rng
from ..errors import ContractViolation, InvalidStateError, NonConvergenceError
from ..models.base_channel import BaseChannel
from ..models.base_prior import BasePrior
from ..scalar.bayes import avg_fisher_info, scalar_mmse_error
from ..scalar.functions import SmoothingParams

logger = logging.getLogger(__name__)

SE_METHODS = ("quadrature", "monte_carlo")

# relative slack on gamma sigma^2 - q_eta before a state is declared invalid
_VARIANCE_SLACK = 1e-12
# Monte-Carlo substreams of the MONTE_CARLO role
_MC_MMSE_STREAM = 0
_MC_FISHER_STREAM = 1


@dataclass(frozen=True)
class SeState:
    """One state of the recursion.

    ``q_h`` is the effective noise of the scalar channel computed from ``q_eta``; the residual fields
    are only filled on states returned by :func:`bamp_se_fixed_point`.
    """

    q_s: float
    q_eta: float
    q_h: float
    lambda_eta: float
    lambda_h: float
    iteration: int
    residual_q_s: float = float("nan")
    residual_q_h: float = float("nan")

    def as_row(self) -> dict:
        return {
            "t": self.iteration,
            "q_s": self.q_s,
            "q_eta": self.q_eta,
            "q_h": self.q_h,
            "lambda_eta": self.lambda_eta,
            "lambda_h": self.lambda_h,
        }


@dataclass(frozen=True)
class _Expectations:
    """The two averages the recursion needs, bound to one model pair and method."""

    prior: BasePrior
    channel: BaseChannel
    method: str = DEFAULTS.SE_METHOD
    mc_samples: int = DEFAULTS.MC_SAMPLES
    seed: int = DEFAULTS.BASE_SEED

    def __post_init__(self):
        if self.method not in SE_METHODS:
            raise ContractViolation(f"Unknown state-evolution method '{self.method}', expected one of {SE_METHODS}")
        if self.method == "monte_carlo" and self.mc_samples < 2:
            raise ContractViolation(f"Monte-Carlo state evolution needs at least 2 samples, got {self.mc_samples}")

    def mmse(self, q_h: float) -> float:
        if self.method == "quadrature":
            return scalar_mmse_error(self.prior, q_h)
        if not q_h > 0.0:
            raise ContractViolation(f"q_h must be positive, got {q_h}")
        rng = make_rng(self.seed, _MC_MMSE_STREAM, RNG_ROLES.MONTE_CARLO)
        s = self.prior.sample(rng, size=self.mc_samples)
        h = s + np.sqrt(q_h) * rng.standard_normal(self.mc_samples)
        return float(np.mean((self.prior.posterior_mean(q_h, h) - s) ** 2))

    def fisher(self, q_eta: float, eta_var: float) -> float:
        if self.method == "quadrature":
            return avg_fisher_info(self.channel, q_eta, eta_var)
        rng = make_rng(self.seed, _MC_FISHER_STREAM, RNG_ROLES.MONTE_CARLO)
        eta = np.sqrt(eta_var) * rng.standard_normal(self.mc_samples)
        z = eta + np.sqrt(q_eta) * rng.standard_normal(self.mc_samples)
        y = self.channel.sample(z, rng)
        return float(np.mean(self.channel.score(y, eta, q_eta) ** 2))


def _eta_variance(q_eta: float, prior: BasePrior, gamma: float) -> float:
    total = gamma * prior.variance
    eta_var = total - q_eta
    if eta_var < -_VARIANCE_SLACK * total:
        raise InvalidStateError(f"q_eta={q_eta} exceeds gamma * prior variance = {total}")
    return max(eta_var, 0.0)


def _effective_noise(q_eta: float, ex: _Expectations, alpha: float, gamma: float) -> float:
    fisher = ex.fisher(q_eta, _eta_variance(q_eta, ex.prior, gamma))
    if not fisher > 0.0:
        raise InvalidStateError(f"Averaged Fisher information is {fisher} at q_eta={q_eta}")
    return 1.0 / (alpha * gamma * fisher)


def _make_state(q_eta: float, q_h: float, gamma: float, iteration: int) -> SeState:
    return SeState(
        q_s=q_eta / gamma,
        q_eta=q_eta,
        q_h=q_h,
        lambda_eta=q_eta,
        lambda_h=q_h,
        iteration=iteration,
    )


def _check_rates(alpha: float, gamma: float):
    if not alpha > 0.0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    if not gamma > 0.0:
        raise ContractViolation(f"gamma must be positive, got {gamma}")


def bamp_se_initial_state(
    prior: BasePrior,
    channel: BaseChannel,
    alpha: float,
    gamma: float = DEFAULTS.GAMMA,
    method: str = DEFAULTS.SE_METHOD,
    mc_samples: int = DEFAULTS.MC_SAMPLES,
    seed: int = DEFAULTS.BASE_SEED,
) -> SeState:
    """Zero-knowledge start ``q_eta = gamma sigma^2``, matching the engine's zero initial estimate."""
    _check_rates(alpha, gamma)
    ex = _Expectations(prior, channel, method, mc_samples, seed)
    q_eta = gamma * prior.variance
    return _make_state(q_eta, _effective_noise(q_eta, ex, alpha, gamma), gamma, 0)


def bamp_se_step(
    state: SeState,
    prior: BasePrior,
    channel: BaseChannel,
    alpha: float,
    gamma: float = DEFAULTS.GAMMA,
    method: str = DEFAULTS.SE_METHOD,
    mc_samples: int = DEFAULTS.MC_SAMPLES,
    seed: int = DEFAULTS.BASE_SEED,
    damping: float = 0.0,
) -> SeState:
    """Advance the recursion by one step.

    ``q_h`` is taken from ``state`` (or computed from its ``q_eta`` when ``nan``), then
    ``q_eta' = (1 - damping) gamma mmse(q_h) + damping q_eta`` and the new state's ``q_h`` is
    computed from ``q_eta'``.

    Raises:
        InvalidStateError: If ``q_eta`` exceeds ``gamma`` times the prior variance.
    """
    _check_rates(alpha, gamma)
    if not 0.0 <= damping < 1.0:
        raise ContractViolation(f"Damping must lie in [0, 1), got {damping}")
    ex = _Expectations(prior, channel, method, mc_samples, seed)
    q_h = state.q_h if np.isfinite(state.q_h) else _effective_noise(state.q_eta, ex, alpha, gamma)
    q_eta = (1.0 - damping) * gamma * ex.mmse(q_h) + damping * state.q_eta
    return _make_state(q_eta, _effective_noise(q_eta, ex, alpha, gamma), gamma, state.iteration + 1)


def bamp_se_trajectory(
    prior: BasePrior,
    channel: BaseChannel,
    alpha: float,
    gamma: float = DEFAULTS.GAMMA,
    n_steps: int = 10,
    method: str = DEFAULTS.SE_METHOD,
    mc_samples: int = DEFAULTS.MC_SAMPLES,
    seed: int = DEFAULTS.BASE_SEED,
    damping: float = 0.0,
) -> list[SeState]:
    """States ``t = 0, ..., n_steps`` from the zero-knowledge start."""
    if n_steps < 0:
        raise ContractViolation(f"n_steps must be nonnegative, got {n_steps}")
    kw = {"method": method, "mc_samples": mc_samples, "seed": seed}
    states = [bamp_se_initial_state(prior, channel, alpha, gamma, **kw)]
    for _ in range(n_steps):
        states.append(bamp_se_step(states[-1], prior, channel, alpha, gamma, damping=damping, **kw))
    return states


def bamp_se_fixed_point(
    prior: BasePrior,
    channel: BaseChannel,
    alpha: float,
    gamma: float = DEFAULTS.GAMMA,
    tol: float = DEFAULTS.SE_TOL,
    max_iters: int = DEFAULTS.SE_MAX_ITERS,
    method: str = DEFAULTS.SE_METHOD,
    mc_samples: int = DEFAULTS.MC_SAMPLES,
    seed: int = DEFAULTS.BASE_SEED,
    damping: float = DEFAULTS.SE_DAMPING,
) -> SeState:
    """Damped iteration from the zero-knowledge start until ``|dq_s| / max(q_s, 1e-12) <= tol``.

    Only the root reached from the zero-knowledge start is returned; a non-monotone ``q_s``
    sequence is logged as a hint that other fixed points may exist.

    Returns:
        The fixed point with ``residual_q_s = |q_s - mmse(q_h)| / q_s`` and ``residual_q_h`` the
        relative change of ``q_h`` over the last step.

    Raises:
        NonConvergenceError: After ``max_iters`` steps, carrying the last two states.
    """
    if not tol > 0.0:
        raise ContractViolation(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise ContractViolation(f"max_iters must be at least 1, got {max_iters}")
    kw = {"method": method, "mc_samples": mc_samples, "seed": seed}
    ex = _Expectations(prior, channel, method, mc_samples, seed)

    prev = bamp_se_initial_state(prior, channel, alpha, gamma, **kw)
    last_sign = 0
    flagged = False
    for _ in range(max_iters):
        curr = bamp_se_step(prev, prior, channel, alpha, gamma, damping=damping, **kw)
        change = curr.q_s - prev.q_s
        sign = int(np.sign(change))
        if sign and last_sign and sign != last_sign and not flagged:
            logger.warning(
                f"State evolution of {prior.name}/{channel.name} at alpha={alpha} is not monotone "
                f"(t={curr.iteration}); other fixed points may exist"
            )
            flagged = True
        last_sign = sign or last_sign
        if abs(change) / max(curr.q_s, 1e-12) <= tol:
            residual_q_s = abs(curr.q_s - ex.mmse(curr.q_h)) / max(curr.q_s, 1e-12)
            residual_q_h = abs(curr.q_h - prev.q_h) / curr.q_h
            logger.debug(f"State evolution converged after {curr.iteration} steps: q_s={curr.q_s:.6g}")
            return replace(curr, residual_q_s=residual_q_s, residual_q_h=residual_q_h)
        older, prev = prev, curr

    logger.warning(f"State evolution of {prior.name}/{channel.name} at alpha={alpha} did not converge")
    raise NonConvergenceError(
        f"State evolution did not reach tol={tol} within {max_iters} steps (q_s={prev.q_s:.6g})",
        last_states=(older, prev),
    )


def optimal_smoothing_params(fp: SeState, gamma: float = DEFAULTS.GAMMA) -> SmoothingParams:
    """``(lambda_eta, lambda_h) = (gamma q_s, q_h)`` of a fixed point."""
    return SmoothingParams(lambda_eta=gamma * fp.q_s, lambda_h=fp.q_h)
