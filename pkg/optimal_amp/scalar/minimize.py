"""Vectorised minimisation of ``(x - y)^2 / (2 lam) + f(y)`` over ``y``.

Every element of ``x`` is an independent 1-D problem. The objective is assumed convex in ``y``,
which holds for convex ``f`` and also for ``f`` whose curvature is bounded below by ``-1/lam``
(the smoothed log-densities inverted by the optimal-estimator construction).
"""

from __future__ import annotations

import numpy as np

from ..constants import DEFAULTS
from ..errors import ContractViolation, MinimizerFailure
from .functions import ScalarFunction, fd_step

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0
_NEWTON_POLISH_STEPS = 4


def _objective(f: ScalarFunction, lam: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (x - y) ** 2 / (2.0 * lam) + f.eval(y)


def _gradient(f: ScalarFunction, lam: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (y - x) / lam + f.deriv(y)


def _bracket(f, lam, x, max_iters):
    step = np.array(np.maximum(1.0, np.sqrt(lam)), dtype=float)
    lo = x - step
    hi = x + step
    lo_step = step.copy()
    hi_step = step.copy()
    for _ in range(max_iters):
        move_lo = _gradient(f, lam, x, lo) > 0.0
        move_hi = _gradient(f, lam, x, hi) < 0.0
        if not (move_lo.any() or move_hi.any()):
            break
        lo = np.where(move_lo, lo - lo_step, lo)
        lo_step = np.where(move_lo, 2.0 * lo_step, lo_step)
        hi = np.where(move_hi, hi + hi_step, hi)
        hi_step = np.where(move_hi, 2.0 * hi_step, hi_step)
    else:
        raise MinimizerFailure(
            f"Could not bracket the minimum of {f.name} within {max_iters} expansions",
            lower=lo,
            upper=hi,
        )
    # finite-difference derivatives can misjudge the sign within one step of a kink
    return lo - fd_step(lo, f.rel_step), hi + fd_step(hi, f.rel_step)


def _golden_section(f, lam, x, lo, hi, xtol, max_iters):
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc = _objective(f, lam, x, c)
    fd = _objective(f, lam, x, d)
    tol = xtol + 4.0 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))
    for _ in range(max_iters):
        active = (hi - lo) > tol
        if not active.any():
            break
        go_left = fc < fd
        left = active & go_left
        right = active & ~go_left

        hi = np.where(left, d, hi)
        lo = np.where(right, c, lo)
        new_point = np.where(go_left, hi - _INV_PHI * (hi - lo), lo + _INV_PHI * (hi - lo))
        f_new = _objective(f, lam, x, new_point)

        d, fd = np.where(left, c, d), np.where(left, fc, fd)
        c, fc = np.where(right, d, c), np.where(right, fd, fc)
        c, fc = np.where(left, new_point, c), np.where(left, f_new, fc)
        d, fd = np.where(right, new_point, d), np.where(right, f_new, fd)
    else:
        if ((hi - lo) > tol).any():
            raise MinimizerFailure(
                f"Golden-section search on {f.name} did not reach xtol={xtol} in {max_iters} iterations",
                lower=lo,
                upper=hi,
            )
    return 0.5 * (lo + hi)


def _newton_polish(f, lam, x, y):
    for _ in range(_NEWTON_POLISH_STEPS):
        g = _gradient(f, lam, x, y)
        curvature = 1.0 / lam + f.second_deriv(y)
        usable = np.isfinite(curvature) & (curvature > 0.0)
        y_new = np.where(usable, y - g / np.where(usable, curvature, 1.0), y)
        accept = np.abs(_gradient(f, lam, x, y_new)) < np.abs(g)
        if not accept.any():
            break
        y = np.where(accept, y_new, y)
    return y


def argmin_quadratic_plus(
    f: ScalarFunction,
    lam,
    x,
    xtol: float = DEFAULTS.XTOL,
    max_iters: int = DEFAULTS.MAX_MINIMIZER_ITERS,
) -> np.ndarray:
    """Element-wise ``argmin_y (x - y)^2 / (2 lam) + f(y)``.

    Args:
        f: The function added to the quadratic.
        lam: Positive scale (scalar or array broadcastable to ``x``).
        x: Points at which to solve.
        xtol: Absolute tolerance on the argument.
        max_iters: Iteration cap for bracketing and for golden-section refinement.

    Returns:
        Array of minimisers with the broadcast shape of ``x`` and ``lam``.

    Raises:
        ContractViolation: If ``lam`` is not positive.
        MinimizerFailure: If bracketing or refinement fails; carries the bracket.
    """
    x, lam = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(lam, dtype=float))
    x = np.array(x)
    lam = np.array(lam)
    if not np.all(lam > 0.0):
        raise ContractViolation(f"Moreau scale must be positive, got min {lam.min()}")
    if not np.all(np.isfinite(x)):
        raise MinimizerFailure(f"Non-finite input passed to the minimiser of {f.name}", lower=x, upper=x)

    lo, hi = _bracket(f, lam, x, max_iters)
    y = _golden_section(f, lam, x, lo, hi, xtol, max_iters)
    if f.has_analytic_deriv:
        y = _newton_polish(f, lam, x, y)
    for kink in f.kinks:
        at_kink = np.full_like(y, kink)
        y = np.where(_objective(f, lam, x, at_kink) <= _objective(f, lam, x, y), at_kink, y)
    return y


def min_quadratic_plus(f: ScalarFunction, lam, x, argmin: np.ndarray | None = None, **kwargs) -> np.ndarray:
    """Element-wise ``min_y (x - y)^2 / (2 lam) + f(y)`` (reuses ``argmin`` when given)."""
    if argmin is None:
        argmin = argmin_quadratic_plus(f, lam, x, **kwargs)
    x, lam = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(lam, dtype=float))
    return _objective(f, lam, x, argmin)
