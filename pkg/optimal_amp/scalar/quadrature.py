"""Gaussian-weighted integrals of densities given by their logarithm.

All integrals are of the form ``int exp(logp(z)) N(z; x, lam) g(z) dz`` and are computed with a
Gauss-Hermite rule re-centred at ``x``. Elements for which doubling the number of nodes changes
the result by more than ``rtol`` are recomputed with adaptive quadrature.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp

from ..constants import DEFAULTS
from ..errors import ContractViolation, QuadratureFailure
from .functions import ScalarFunction

logger = logging.getLogger(__name__)


class SmoothedMoments(NamedTuple):
    """Log-normaliser, mean and variance of ``exp(logp(z)) N(z; x, lam)`` in ``z``."""

    log_norm: np.ndarray
    mean: np.ndarray
    var: np.ndarray


@lru_cache(maxsize=16)
def standard_normal_rule(n: int = DEFAULTS.HERMITE_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and log-weights with ``E[g(Z)] ~ sum_i exp(logw_i) g(t_i)`` for ``Z ~ N(0, 1)``."""
    x, w = np.polynomial.hermite.hermgauss(n)
    nodes = np.sqrt(2.0) * x
    log_weights = np.log(w) - 0.5 * np.log(np.pi)
    nodes.setflags(write=False)
    log_weights.setflags(write=False)
    return nodes, log_weights


def gaussian_expectation(fn, mean, var, n: int = DEFAULTS.HERMITE_NODES) -> np.ndarray:
    """``E[fn(Z)]`` for ``Z ~ N(mean, var)``, vectorised over broadcastable ``mean`` and ``var``."""
    nodes, log_weights = standard_normal_rule(n)
    mean = np.asarray(mean, dtype=float)[..., None]
    std = np.sqrt(np.asarray(var, dtype=float))[..., None]
    return np.sum(np.exp(log_weights) * fn(mean + std * nodes), axis=-1)


def _hermite_moments(log_fn, lam: np.ndarray, x: np.ndarray, aux: np.ndarray, n: int) -> SmoothedMoments:
    nodes, log_weights = standard_normal_rule(n)
    z = x[..., None] + np.sqrt(lam)[..., None] * nodes
    log_terms = log_fn(z, aux[..., None]) + log_weights
    log_norm = logsumexp(log_terms, axis=-1)
    post = np.exp(log_terms - log_norm[..., None])
    mean = np.sum(post * z, axis=-1)
    var = np.sum(post * (z - mean[..., None]) ** 2, axis=-1)
    return SmoothedMoments(log_norm, mean, var)


def _adaptive_moments(log_fn, kinks, lam: float, x: float, aux: float, half_width: float, offset: float, name: str):
    sd = np.sqrt(lam)
    lo, hi = x - half_width * sd, x + half_width * sd
    points = [k for k in kinks if lo < k < hi] or None

    def integrand(z, power):
        log_val = float(log_fn(np.asarray(z), aux)) - 0.5 * (z - x) ** 2 / lam - offset
        return np.exp(log_val) * (z - x) ** power

    kwargs = {"points": points, "limit": 200, "epsabs": 0.0, "epsrel": 1e-12}
    m0 = quad(integrand, lo, hi, args=(0,), **kwargs)[0]
    m1 = quad(integrand, lo, hi, args=(1,), **kwargs)[0]
    m2 = quad(integrand, lo, hi, args=(2,), **kwargs)[0]
    if not (np.isfinite(m0) and m0 > 0.0):
        raise QuadratureFailure(f"Adaptive quadrature of {name} at x={x}, lam={lam} returned {m0}")
    log_norm = np.log(m0) + offset - 0.5 * np.log(2.0 * np.pi * lam)
    shift = m1 / m0
    return log_norm, x + shift, max(m2 / m0 - shift**2, 0.0)


def _changed(a: np.ndarray, b: np.ndarray, rtol: float) -> np.ndarray:
    return np.abs(a - b) > rtol * np.maximum(1.0, np.abs(b))


def gaussian_smoothed_moments(
    logp,
    lam,
    x,
    aux=None,
    n: int = DEFAULTS.HERMITE_NODES,
    rtol: float = DEFAULTS.FALLBACK_RTOL,
    half_width: float = DEFAULTS.FALLBACK_HALF_WIDTH,
) -> SmoothedMoments:
    """Moments of the tilted density ``exp(logp(z)) N(z; x, lam)``.

    ``log_norm`` is ``log int exp(logp(z)) N(z; x, lam) dz``; ``mean`` and ``var`` are the mean and
    variance of ``z`` under the normalised tilted density. ``lam == 0`` is exact: ``(logp(x), x, 0)``.

    Args:
        logp: A :class:`ScalarFunction`, or, when ``aux`` is given, a callable ``(z, aux) -> log p``
            whose second argument is an element-wise parameter (e.g. the observed output ``y``).
        lam: Nonnegative smoothing variance(s).
        x: Centre(s) of the Gaussian kernel.
        aux: Optional element-wise parameter array broadcastable to ``x``.
        n: Number of Gauss-Hermite nodes of the coarse rule.
        rtol: Node-doubling tolerance that triggers the adaptive fallback.
        half_width: Fallback integration range in standard deviations.
    """
    if aux is None:

        def log_fn(z, _aux):
            return logp.eval(z)

        aux = 0.0
    else:
        log_fn = logp
    kinks = getattr(logp, "kinks", ())
    name = getattr(logp, "name", "log-density")

    x, lam, aux = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(lam, dtype=float), np.asarray(aux, dtype=float)
    )
    if np.any(lam < 0.0):
        raise ContractViolation(f"Smoothing variance must be nonnegative, got min {lam.min()}")

    log_norm = np.array(log_fn(x, aux), dtype=float)
    mean = np.array(x, dtype=float)
    var = np.zeros_like(mean)
    smooth = lam > 0.0
    if smooth.any():
        xs, ls, auxs = x[smooth], lam[smooth], aux[smooth]
        coarse = _hermite_moments(log_fn, ls, xs, auxs, n)
        fine = _hermite_moments(log_fn, ls, xs, auxs, 2 * n)
        ln, mu, v = fine.log_norm.copy(), fine.mean.copy(), fine.var.copy()

        bad = (
            _changed(coarse.log_norm, fine.log_norm, rtol)
            | _changed(coarse.mean, fine.mean, rtol)
            | _changed(coarse.var, fine.var, rtol)
            | ~np.isfinite(fine.log_norm)
        )
        if bad.any():
            logger.debug(f"Adaptive quadrature fallback for {int(bad.sum())} point(s) of {name}")
            for i in np.flatnonzero(bad):
                if np.isfinite(fine.log_norm[i]):
                    offset = float(fine.log_norm[i])
                else:
                    offset = float(log_fn(np.asarray(xs[i]), auxs[i]))
                ln[i], mu[i], v[i] = _adaptive_moments(
                    log_fn, kinks, float(ls[i]), float(xs[i]), float(auxs[i]), half_width, offset, name
                )

        log_norm[smooth], mean[smooth], var[smooth] = ln, mu, v

    if not np.all(np.isfinite(log_norm)):
        raise QuadratureFailure(f"Gaussian smoothing of {name} produced non-finite values")
    return SmoothedMoments(log_norm[()], mean[()], var[()])


def gaussian_smooth_log_density(logp: ScalarFunction, lam, x, **kwargs):
    """``log int exp(logp(z)) N(z; x, lam) dz``; exactly ``logp(x)`` when ``lam == 0``."""
    return gaussian_smoothed_moments(logp, lam, x, **kwargs).log_norm
