"""The generalized AMP iteration.

One step ``t`` performs, in order::

    eta^t     = X s^t + lambda_eta^t G_y(lambda_eta^{t-1}, y, eta^{t-1})
    lambda_h^t = 1 / (alpha gamma mean(dG_y(lambda_eta^t, y, eta^t)))
    h^t       = s^t - lambda_h^t X^T G_y(lambda_eta^t, y, eta^t)
    s^{t+1}   = G_s(lambda_h^t, h^t)
    lambda_eta^{t+1} = gamma lambda_h^t mean(dG_s(lambda_h^t, h^t))

The memory term is dropped at ``t = 0``.
"""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from ..constants import DEFAULTS
from ..errors import ContractViolation, DivergenceError
from .state import CorrectorPair, GampState, GampSummary, ProblemInstance

logger = logging.getLogger(__name__)


def _clamp(value: float, name: str, iteration: int, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    if np.isnan(value):
        raise DivergenceError(f"{name} became {value} at iteration {iteration}", iteration=iteration)
    if value < lo or value > hi:
        clamped = min(max(value, lo), hi)
        logger.warning(f"Clamping {name}={value:.3g} to {clamped:.3g} at iteration {iteration}")
        return clamped
    return value


def _check_finite(name: str, x: np.ndarray, iteration: int):
    if not np.all(np.isfinite(x)):
        raise DivergenceError(f"Non-finite {name} at iteration {iteration}", iteration=iteration)


def gamp_step(
    state: GampState,
    inst: ProblemInstance,
    c: CorrectorPair,
    damping: float = 0.0,
    lambda_bounds: tuple[float, float] = (DEFAULTS.LAMBDA_MIN, DEFAULTS.LAMBDA_MAX),
) -> GampState:
    """Perform one synchronous gAMP update.

    Args:
        state: State before the step.
        inst: The problem instance.
        c: Corrector pair.
        damping: ``rho`` in ``s^{t+1} <- (1 - rho) s^{t+1} + rho s^t``.
        lambda_bounds: Clamp range for both smoothing parameters.

    Returns:
        The state before the next step; its ``eta`` and ``lambda_eta_prev`` are this step's
        ``eta^t`` and ``lambda_eta^t``, its ``lambda_h`` is ``lambda_h^t``.

    Raises:
        DivergenceError: If an iterate becomes non-finite.
    """
    t = state.iteration
    X, y = inst.X, inst.y

    eta = X @ state.s_hat
    if t > 0:
        eta = eta + state.lambda_eta * c.g_y(state.lambda_eta_prev, y, state.eta)
    _check_finite("eta", eta, t)

    g_y, dg_y = c.measurement(state.lambda_eta, y, eta)
    precision = inst.alpha * inst.gamma * float(np.mean(dg_y))
    lambda_h = _clamp(1.0 / precision if precision > 0.0 else np.inf, "lambda_h", t, lambda_bounds)

    h = state.s_hat - lambda_h * (X.T @ g_y)
    _check_finite("h", h, t)

    s_new, ds = c.signal(lambda_h, h)
    lambda_eta = _clamp(inst.gamma * lambda_h * float(np.mean(ds)), "lambda_eta", t, lambda_bounds)
    if damping:
        s_new = (1.0 - damping) * s_new + damping * state.s_hat
    _check_finite("s_hat", s_new, t)

    return GampState(
        s_hat=np.asarray(s_new, dtype=float),
        eta=eta,
        eta_prev=state.eta,
        lambda_eta=lambda_eta,
        lambda_eta_prev=state.lambda_eta,
        lambda_h=lambda_h,
        iteration=t + 1,
    )


def _relative_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old)))


def _smoothing_settled(new: GampState, old: GampState, tol: float) -> bool:
    # NaN lambda_h of the initial state never compares as settled
    pairs = ((new.lambda_eta, old.lambda_eta), (new.lambda_h, old.lambda_h))
    return all(abs(a - b) <= tol * abs(b) for a, b in pairs)


def run_gamp(
    inst: ProblemInstance,
    c: CorrectorPair,
    init: GampState | None = None,
    max_iters: int = DEFAULTS.GAMP_MAX_ITERS,
    tol: float = DEFAULTS.GAMP_TOL,
    damping: float = DEFAULTS.DAMPING,
    prior_variance: float | None = None,
    keep_iterates: bool = False,
    lambda_bounds: tuple[float, float] = (DEFAULTS.LAMBDA_MIN, DEFAULTS.LAMBDA_MAX),
) -> tuple[np.ndarray, list[GampSummary], bool]:
    """Iterate :func:`gamp_step` until ``s_hat`` and both smoothing parameters stop moving.

    A run stops once the relative change of ``s_hat`` and of ``lambda_eta`` and ``lambda_h`` is at
    most ``tol``. The step out of the initial state never counts as converged.

    Args:
        inst: The problem instance.
        c: Corrector pair.
        init: Starting state; by default the zero estimate with ``lambda_eta = gamma * prior_variance``.
        max_iters: Maximum number of steps, at least one.
        tol: Tolerance on ``||s^{t+1} - s^t|| / max(1, ||s^t||)`` and on the relative change of both
            smoothing parameters.
        damping: Damping factor on ``s_hat``.
        prior_variance: Signal variance used for the default initial state.
        keep_iterates: Store ``s_hat`` and ``eta`` in each summary.
        lambda_bounds: Clamp range for the smoothing parameters.

    Returns:
        The final estimate, one summary per step and whether the tolerance was met.
    """
    if max_iters < 1:
        raise ContractViolation(f"max_iters must be at least 1, got {max_iters}")
    if not 0.0 <= damping < 1.0:
        raise ContractViolation(f"Damping must lie in [0, 1), got {damping}")
    if init is None:
        if prior_variance is None:
            raise ContractViolation("run_gamp needs either an initial state or the prior variance")
        init = GampState.initial(inst, inst.gamma * prior_variance)

    z_true = inst.z_true()
    state = init
    trajectory = []
    converged = False
    for _ in range(max_iters):
        new_state = gamp_step(state, inst, c, damping=damping, lambda_bounds=lambda_bounds)
        delta = _relative_change(new_state.s_hat, state.s_hat)
        summary = GampSummary(
            t=state.iteration,
            lambda_eta=new_state.lambda_eta_prev,
            lambda_h=new_state.lambda_h,
            delta=delta,
        )
        if z_true is not None:
            summary = replace(
                summary,
                q_s=float(np.mean((state.s_hat - inst.s_true) ** 2)),
                q_eta=float(np.mean((new_state.eta - z_true) ** 2)),
            )
        if keep_iterates:
            summary = replace(summary, s_hat=state.s_hat, eta=new_state.eta)
        trajectory.append(summary)
        settled = state.iteration > 0 and _smoothing_settled(new_state, state, tol)
        state = new_state
        if delta <= tol and settled:
            converged = True
            break

    logger.debug(
        f"{c.kind} run on N={inst.N}, P={inst.P} stopped after {len(trajectory)} step(s), converged={converged}"
    )
    return state.s_hat, trajectory, converged
