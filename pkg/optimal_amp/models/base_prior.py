from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..scalar.functions import ScalarFunction
from ..scalar.quadrature import SmoothedMoments, gaussian_smoothed_moments


class BasePrior(ABC):
    """Base class for all signal priors ``P_s``.

    Subclasses provide the log-density and a sampler. Gaussian smoothing of the density (and with
    it the scalar posterior mean and variance under ``h = s + sqrt(lam) w``) is computed by
    quadrature here; subclasses with closed forms override :meth:`smoothed_moments`.

    Parameters
    ----------
    name
        Registry name of the model.
    variance
        Signal variance ``sigma_s^2``.
    """

    def __init__(self, name: str, variance: float):
        self.name = name
        self.variance = float(variance)

    @property
    @abstractmethod
    def log_density(self) -> ScalarFunction:
        pass

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        pass

    @property
    def params(self) -> dict:
        return {}

    def smoothed_moments(self, lam, h) -> SmoothedMoments:
        return gaussian_smoothed_moments(self.log_density, lam, h)

    def log_smoothed(self, lam, h):
        """``log P_s(h, lam)``, the log-density of ``s + sqrt(lam) w``."""
        return self.smoothed_moments(lam, h).log_norm

    def posterior_mean(self, lam, h):
        return self.smoothed_moments(lam, h).mean

    def posterior_var(self, lam, h):
        return self.smoothed_moments(lam, h).var

    def neg_log_density(self) -> ScalarFunction:
        """The MAP regulariser ``-log P_s``."""
        logp = self.log_density
        d2fn = None if logp.d2fn is None else (lambda x: -logp.d2fn(x))
        dfn = None if logp.dfn is None else (lambda x: -logp.dfn(x))
        return ScalarFunction(
            fn=lambda x: -logp.eval(x),
            dfn=dfn,
            d2fn=d2fn,
            convex=True,
            kinks=logp.kinks,
            name=f"-log {self.name}",
        )

    def smoothed_log_density(self, lam: float) -> ScalarFunction:
        """``h -> log P_s(h, lam)`` with its score and curvature.

        The derivatives follow from the posterior moments: the score is ``(E[s|h] - h) / lam`` and
        the curvature is ``(Var[s|h] - lam) / lam^2``.
        """
        if lam == 0.0:
            return self.log_density

        def fn(h):
            return self.smoothed_moments(lam, h).log_norm

        def dfn(h):
            return (self.smoothed_moments(lam, h).mean - h) / lam

        def d2fn(h):
            return (self.smoothed_moments(lam, h).var - lam) / lam**2

        return ScalarFunction(fn=fn, dfn=dfn, d2fn=d2fn, name=f"log {self.name}(., {lam:g})")

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"
