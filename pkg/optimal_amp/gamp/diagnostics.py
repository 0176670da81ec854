"""Fixed-point diagnostics and a proximal-gradient reference solver for M-estimation."""

from __future__ import annotations

import logging

import numpy as np

from ..constants import DEFAULTS
from ..errors import ContractViolation
from ..estimators.families import LossFamily
from ..scalar.functions import ScalarFunction
from ..scalar.proximal import prox
from .state import ProblemInstance

logger = logging.getLogger(__name__)

_KINK_ATOL = 1e-9
_CURVATURE_PROBES = 201


def _regularizer_subgradient(reg: ScalarFunction, s_hat: np.ndarray, target: np.ndarray) -> np.ndarray:
    """``reg'(s_hat)``, with the subgradient element closest to ``target`` at kinks."""
    grad = np.asarray(reg.deriv(s_hat), dtype=float).copy()
    for kink in reg.kinks:
        at_kink = np.abs(s_hat - kink) <= _KINK_ATOL * max(1.0, abs(kink))
        if at_kink.any():
            left, right = reg.one_sided_derivs(np.full(int(at_kink.sum()), kink))
            grad[at_kink] = np.clip(target[at_kink], np.minimum(left, right), np.maximum(left, right))
    return grad


def stationarity_residual(s_hat, inst: ProblemInstance, loss: LossFamily, reg: ScalarFunction) -> float:
    """``||X^T L'(y, X s_hat) + reg'(s_hat)||_2 / sqrt(P)``.

    At kinks of the regulariser the subgradient element minimising each coordinate of the
    residual is used, so points satisfying the subdifferential inclusion score zero.
    """
    s_hat = np.asarray(s_hat, dtype=float)
    data_grad = inst.X.T @ loss.bind(inst.y).deriv(inst.X @ s_hat)
    reg_grad = _regularizer_subgradient(reg, s_hat, -data_grad)
    return float(np.linalg.norm(data_grad + reg_grad) / np.sqrt(inst.P))


def loss_curvature_bound(loss: LossFamily, y: np.ndarray, half_width: float) -> float:
    """Largest ``L''(y_mu, eta)`` over the observed outputs and ``eta`` in ``[-half_width, half_width]``."""
    eta = np.linspace(-half_width, half_width, _CURVATURE_PROBES)
    outputs = np.unique(y)
    curv = loss.bind(outputs[:, None]).second_deriv(np.broadcast_to(eta, (outputs.size, eta.size)))
    return float(np.max(curv))


def solve_prox_gradient(
    inst: ProblemInstance,
    loss: LossFamily,
    reg: ScalarFunction,
    step: float | None = None,
    max_iters: int = 20_000,
    tol: float = 1e-12,
    s_init: np.ndarray | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Minimise ``sum_mu L(y_mu, x_mu . s) + sum_i reg(s_i)`` by proximal gradient descent.

    ``s <- prox_{step}[reg](s - step X^T L'(y, X s))`` with ``step = 1 / (||X||_2^2 sup L'')`` unless given.

    Returns:
        The minimiser, the number of iterations and whether the relative change fell below ``tol``.
    """
    if max_iters < 1:
        raise ContractViolation(f"max_iters must be at least 1, got {max_iters}")
    if step is None:
        z_scale = np.abs(inst.X @ s_init).max() if s_init is not None else 0.0
        half_width = max(DEFAULTS.GRID_HALF_WIDTH_FACTOR, 2.0 * z_scale)
        lipschitz = np.linalg.norm(inst.X, 2) ** 2 * loss_curvature_bound(loss, inst.y, half_width)
        step = 1.0 / lipschitz
    bound = loss.bind(inst.y)
    s = np.zeros(inst.P) if s_init is None else np.array(s_init, dtype=float)
    for it in range(1, max_iters + 1):
        s_new = prox(reg, step, s - step * (inst.X.T @ bound.deriv(inst.X @ s)))
        change = np.linalg.norm(s_new - s) / max(1.0, np.linalg.norm(s))
        s = s_new
        if change <= tol:
            return s, it, True
    logger.warning(f"Proximal gradient stopped after {max_iters} iterations without reaching tol={tol}")
    return s, max_iters, False
