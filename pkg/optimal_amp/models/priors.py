"""Concrete signal priors. All priors are zero-mean."""

from __future__ import annotations

import numpy as np
from scipy.special import log_ndtr, logsumexp

from ..constants import DEFAULTS, MODEL_NAMES
from ..errors import ContractViolation
from ..scalar.functions import ScalarFunction
from ..scalar.quadrature import SmoothedMoments
from .base_prior import BasePrior

_LOG_2PI = np.log(2.0 * np.pi)


def _mills(a):
    """``phi(a) / Phi(a)`` computed in the log domain."""
    return np.exp(-0.5 * a**2 - 0.5 * _LOG_2PI - log_ndtr(a))


class GaussianPrior(BasePrior):
    """``N(0, variance)``; Gaussian smoothing has closed forms."""

    def __init__(self, variance: float):
        if not variance > 0.0:
            raise ContractViolation(f"Gaussian prior variance must be positive, got {variance}")
        super().__init__(MODEL_NAMES.GAUSSIAN_PRIOR, variance)

    @property
    def params(self) -> dict:
        return {"variance": self.variance}

    @property
    def log_density(self) -> ScalarFunction:
        v = self.variance
        return ScalarFunction(
            fn=lambda s: -0.5 * s**2 / v - 0.5 * np.log(2.0 * np.pi * v),
            dfn=lambda s: -s / v,
            d2fn=lambda s: np.full_like(s, -1.0 / v, dtype=float),
            name=self.name,
        )

    def sample(self, rng, size=None):
        return rng.normal(0.0, np.sqrt(self.variance), size=size)

    def smoothed_moments(self, lam, h) -> SmoothedMoments:
        h, lam = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(lam, dtype=float))
        v = self.variance
        total = v + lam
        log_norm = -0.5 * h**2 / total - 0.5 * np.log(2.0 * np.pi * total)
        return SmoothedMoments(log_norm[()], (h * v / total)[()], (v * lam / total)[()])


class LaplacePrior(BasePrior):
    """``(1 / 2b) exp(-|s| / b)``; variance ``2 b^2``.

    The smoothed density is a two-sided exponentially modified Gaussian and the posterior is a
    mixture of two truncated normals, so all smoothing quantities are closed form.
    """

    def __init__(self, scale: float):
        if not scale > 0.0:
            raise ContractViolation(f"Laplace scale must be positive, got {scale}")
        self.scale = float(scale)
        super().__init__(MODEL_NAMES.LAPLACE_PRIOR, 2.0 * self.scale**2)

    @property
    def params(self) -> dict:
        return {"scale": self.scale}

    @property
    def log_density(self) -> ScalarFunction:
        b = self.scale
        return ScalarFunction(
            fn=lambda s: -np.abs(s) / b - np.log(2.0 * b),
            dfn=lambda s: -np.sign(s) / b,
            d2fn=np.zeros_like,
            kinks=(0.0,),
            name=self.name,
        )

    def sample(self, rng, size=None):
        return rng.laplace(0.0, self.scale, size=size)

    def smoothed_moments(self, lam, h) -> SmoothedMoments:
        h, lam = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(lam, dtype=float))
        b = self.scale
        log_norm = np.array(-np.abs(h) / b - np.log(2.0 * b), dtype=float)
        mean = np.array(h, dtype=float)
        var = np.zeros_like(mean)

        smooth = lam > 0.0
        if smooth.any():
            hs, ls = h[smooth], lam[smooth]
            sd = np.sqrt(ls)
            # positive half: N(h - lam/b, lam) truncated to s > 0
            mu_pos = hs - ls / b
            a_pos = mu_pos / sd
            log_pos = -hs / b + log_ndtr(a_pos)
            m_pos = _mills(a_pos)
            mean_pos = mu_pos + sd * m_pos
            var_pos = ls * (1.0 - a_pos * m_pos - m_pos**2)
            # negative half: N(h + lam/b, lam) truncated to s < 0
            mu_neg = hs + ls / b
            a_neg = -mu_neg / sd
            log_neg = hs / b + log_ndtr(a_neg)
            m_neg = _mills(a_neg)
            mean_neg = mu_neg - sd * m_neg
            var_neg = ls * (1.0 - a_neg * m_neg - m_neg**2)

            log_mix = np.logaddexp(log_pos, log_neg)
            w_pos = np.exp(log_pos - log_mix)
            w_neg = np.exp(log_neg - log_mix)
            mu = w_pos * mean_pos + w_neg * mean_neg
            second = w_pos * (np.maximum(var_pos, 0.0) + mean_pos**2) + w_neg * (np.maximum(var_neg, 0.0) + mean_neg**2)

            log_norm[smooth] = -np.log(2.0 * b) + ls / (2.0 * b**2) + log_mix
            mean[smooth] = mu
            var[smooth] = np.maximum(second - mu**2, 0.0)
        return SmoothedMoments(log_norm[()], mean[()], var[()])


class DensityPrior(BasePrior):
    """A prior given only by a log-density and a sampler; smoothing uses quadrature."""

    def __init__(self, name: str, log_density: ScalarFunction, sampler, variance: float):
        super().__init__(name, variance)
        self._log_density = log_density
        self._sampler = sampler

    @property
    def log_density(self) -> ScalarFunction:
        return self._log_density

    def sample(self, rng, size=None):
        return self._sampler(rng, size)


class GaussianMixturePrior(DensityPrior):
    """Symmetric two-component mixture ``(N(-m, v) + N(m, v)) / 2``; not log-concave for large ``m``."""

    def __init__(self, separation: float, component_variance: float = 1.0):
        if not component_variance > 0.0:
            raise ContractViolation(f"Mixture component variance must be positive, got {component_variance}")
        self.separation = float(separation)
        self.component_variance = float(component_variance)
        m, v = self.separation, self.component_variance
        means = np.array([-m, m])

        def fn(s):
            s = np.asarray(s, dtype=float)[..., None]
            comp = -0.5 * (s - means) ** 2 / v - 0.5 * np.log(2.0 * np.pi * v)
            return logsumexp(comp, axis=-1, b=0.5)

        def sampler(rng, size):
            signs = rng.choice([-1.0, 1.0], size=size)
            return signs * m + rng.normal(0.0, np.sqrt(v), size=size)

        super().__init__(
            MODEL_NAMES.GAUSSIAN_MIXTURE_PRIOR,
            ScalarFunction(fn=fn, name=MODEL_NAMES.GAUSSIAN_MIXTURE_PRIOR),
            sampler,
            v + m**2,
        )

    @property
    def params(self) -> dict:
        return {"separation": self.separation, "component_variance": self.component_variance}


def make_gaussian_prior(variance: float) -> GaussianPrior:
    return GaussianPrior(variance)


def make_laplace_prior(scale: float = DEFAULTS.LAPLACE_SCALE) -> LaplacePrior:
    return LaplacePrior(scale)


def make_gaussian_mixture_prior(separation: float, component_variance: float = 1.0) -> GaussianMixturePrior:
    return GaussianMixturePrior(separation, component_variance)
