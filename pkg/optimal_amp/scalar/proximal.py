"""Proximal maps and Moreau envelopes of scalar functions."""

from __future__ import annotations

import numpy as np

from .functions import ScalarFunction, fd_step
from .minimize import argmin_quadratic_plus, min_quadratic_plus


def prox(f: ScalarFunction, lam, x, **kwargs):
    """Proximal map ``argmin_y (x - y)^2 / (2 lam) + f(y)``, element-wise in ``x``."""
    return argmin_quadratic_plus(f, lam, x, **kwargs)[()]


def moreau(f: ScalarFunction, lam, x, **kwargs):
    """Moreau envelope ``min_y (x - y)^2 / (2 lam) + f(y)``, element-wise in ``x``."""
    return min_quadratic_plus(f, lam, x, **kwargs)[()]


def moreau_grad(f: ScalarFunction, lam, x, p=None, **kwargs):
    """Derivative of the Moreau envelope, ``(x - prox(x)) / lam``.

    ``p`` may carry an already computed proximal point.
    """
    x = np.asarray(x, dtype=float)
    if p is None:
        p = prox(f, lam, x, **kwargs)
    return ((x - p) / np.asarray(lam, dtype=float))[()]


def prox_and_envelope(f: ScalarFunction, lam, x, **kwargs) -> tuple[np.ndarray, np.ndarray]:
    """Proximal point and envelope value from a single minimisation."""
    p = argmin_quadratic_plus(f, lam, x, **kwargs)
    return p, min_quadratic_plus(f, lam, x, argmin=p)


def prox_derivative(f: ScalarFunction, lam, x, p=None, **kwargs):
    """``d prox(f, lam, x) / dx``.

    Uses the implicit-function formula ``1 / (1 + lam f''(p))`` when ``f`` has a second derivative
    everywhere, and central differences of the proximal map otherwise.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if f.has_second_deriv:
        if p is None:
            p = argmin_quadratic_plus(f, lam, x, **kwargs)
        return (1.0 / (1.0 + lam * f.second_deriv(p)))[()]
    h = fd_step(x, f.rel_step)
    upper = argmin_quadratic_plus(f, lam, x + h, **kwargs)
    lower = argmin_quadratic_plus(f, lam, x - h, **kwargs)
    return ((upper - lower) / (2.0 * h))[()]
