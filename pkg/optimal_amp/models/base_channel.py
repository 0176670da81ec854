from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..constants import DEFAULTS
from ..scalar.functions import ScalarFunction, fd_step
from ..scalar.quadrature import SmoothedMoments, gaussian_smoothed_moments, standard_normal_rule

OUTPUT_KINDS = ("continuous", "binary")


class BaseChannel(ABC):
    """Base class for all measurement channels ``P(y | z)``.

    A channel supplies its log-likelihood and a sampler. Everything the message-passing code needs
    from it (the Gaussian-smoothed likelihood ``P_y(y | eta, lam)``, its score and curvature in
    ``eta`` and the predictive law of ``y`` given ``eta``) has a quadrature default here that
    concrete channels may replace with closed forms.

    Parameters
    ----------
    name
        Registry name of the model.
    output_kind
        ``"continuous"`` or ``"binary"``; binary outputs are encoded as ``0.0`` / ``1.0``.
    """

    output_alphabet: tuple[float, ...] = ()

    def __init__(self, name: str, output_kind: str):
        if output_kind not in OUTPUT_KINDS:
            raise ValueError(f"Unknown output kind {output_kind!r}, expected one of {OUTPUT_KINDS}")
        self.name = name
        self.output_kind = output_kind

    @abstractmethod
    def log_likelihood(self, y, z) -> np.ndarray:
        pass

    @abstractmethod
    def sample(self, z, rng: np.random.Generator) -> np.ndarray:
        pass

    @property
    def params(self) -> dict:
        return {}

    @property
    def is_binary(self) -> bool:
        return self.output_kind == "binary"

    # unsmoothed derivatives in z

    def raw_score(self, y, z):
        z = np.asarray(z, dtype=float)
        h = fd_step(z)
        return (self.log_likelihood(y, z + h) - self.log_likelihood(y, z - h)) / (2.0 * h)

    def raw_curvature(self, y, z):
        z = np.asarray(z, dtype=float)
        h = fd_step(z)
        return (self.raw_score(y, z + h) - self.raw_score(y, z - h)) / (2.0 * h)

    def likelihood_function(self, y: float) -> ScalarFunction:
        """``z -> log P(y | z)`` at a fixed output."""
        return ScalarFunction(
            fn=lambda z: self.log_likelihood(y, z),
            dfn=lambda z: self.raw_score(y, z),
            d2fn=lambda z: self.raw_curvature(y, z),
            name=f"log {self.name}(y={y:g} | .)",
        )

    # Gaussian smoothing in z

    def _log_likelihood_in_z(self, z, y):
        return self.log_likelihood(y, z)

    def smoothed_moments(self, y, eta, lam) -> SmoothedMoments:
        """Normaliser, mean and variance of ``P(y | z) N(z; eta, lam)`` in ``z``."""
        return gaussian_smoothed_moments(self._log_likelihood_in_z, lam, eta, aux=y)

    def smoothed_log_likelihood(self, y, eta, lam):
        """``log P_y(y | eta, lam)``, normalised as a density in ``y``."""
        return self.smoothed_moments(y, eta, lam).log_norm

    def score_and_curvature(self, y, eta, lam) -> tuple[np.ndarray, np.ndarray]:
        """First and second ``eta``-derivatives of ``log P_y(y | eta, lam)``.

        They are ``(E[z | y, eta] - eta) / lam`` and ``(Var[z | y, eta] - lam) / lam^2``. Below
        ``RAW_SMOOTHING_CUTOFF`` the unsmoothed derivatives are returned.
        """
        if lam < DEFAULTS.RAW_SMOOTHING_CUTOFF:
            return self.raw_score(y, eta), self.raw_curvature(y, eta)
        m = self.smoothed_moments(y, eta, lam)
        return (m.mean - np.asarray(eta, dtype=float)) / lam, (m.var - lam) / lam**2

    def score(self, y, eta, lam):
        return self.score_and_curvature(y, eta, lam)[0]

    def curvature(self, y, eta, lam):
        return self.score_and_curvature(y, eta, lam)[1]

    def smoothed_likelihood_function(self, y: float, lam: float) -> ScalarFunction:
        """``eta -> log P_y(y | eta, lam)`` with analytic score and curvature."""
        if lam == 0.0:
            return self.likelihood_function(y)
        return ScalarFunction(
            fn=lambda eta: self.smoothed_log_likelihood(y, eta, lam),
            dfn=lambda eta: self.score(y, eta, lam),
            d2fn=lambda eta: self.curvature(y, eta, lam),
            name=f"log {self.name}(y={y:g} | ., {lam:g})",
        )

    # predictive law of y given eta

    def output_quadrature(self, z, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights integrating over ``y ~ P(. | z)``; needed by continuous channels."""
        raise NotImplementedError(f"{type(self).__name__} does not provide an output quadrature")

    def predictive_quadrature(self, eta, q: float, n: int = DEFAULTS.HERMITE_NODES):
        """Nodes ``y`` and weights integrating over ``y ~ P_y(. | eta, q)``.

        Both returned arrays have shape ``eta.shape + (K,)`` and the weights sum to one along the
        last axis. Binary channels sum exactly over their alphabet; continuous channels nest a
        Gauss-Hermite rule over ``z ~ N(eta, q)`` with :meth:`output_quadrature`.
        """
        eta = np.asarray(eta, dtype=float)
        if self.is_binary:
            y = np.broadcast_to(np.array(self.output_alphabet), (*eta.shape, len(self.output_alphabet)))
            log_w = self.smoothed_log_likelihood(y, eta[..., None], q)
            weights = np.exp(log_w)
            return np.array(y), weights / weights.sum(axis=-1, keepdims=True)
        nodes, log_weights = standard_normal_rule(n)
        z = eta[..., None] + np.sqrt(q) * nodes
        y, w_y = self.output_quadrature(z, n)
        weights = np.exp(log_weights)[:, None] * w_y
        return y.reshape(*eta.shape, -1), weights.reshape(*eta.shape, -1)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"
