"""Concrete measurement channels."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..constants import DEFAULTS, MODEL_NAMES
from ..errors import ContractViolation
from ..scalar.quadrature import SmoothedMoments, standard_normal_rule
from .base_channel import BaseChannel


class LinearGaussianChannel(BaseChannel):
    """``y = z + eps`` with ``eps ~ N(0, noise_variance)``.

    Smoothing a Gaussian likelihood with a Gaussian kernel only adds variances, so every smoothed
    quantity is closed form.
    """

    def __init__(self, noise_variance: float):
        if not noise_variance > 0.0:
            raise ContractViolation(f"Noise variance must be positive, got {noise_variance}")
        self.noise_variance = float(noise_variance)
        super().__init__(MODEL_NAMES.LINEAR_GAUSSIAN_CHANNEL, "continuous")

    @property
    def params(self) -> dict:
        return {"noise_variance": self.noise_variance}

    def log_likelihood(self, y, z):
        v = self.noise_variance
        return -0.5 * (np.asarray(y, dtype=float) - z) ** 2 / v - 0.5 * np.log(2.0 * np.pi * v)

    def sample(self, z, rng):
        z = np.asarray(z, dtype=float)
        return z + rng.normal(0.0, np.sqrt(self.noise_variance), size=z.shape)

    def raw_score(self, y, z):
        return (np.asarray(y, dtype=float) - z) / self.noise_variance

    def raw_curvature(self, y, z):
        return np.full(np.broadcast(np.asarray(y), np.asarray(z)).shape, -1.0 / self.noise_variance)[()]

    def smoothed_moments(self, y, eta, lam) -> SmoothedMoments:
        y, eta, lam = np.broadcast_arrays(
            np.asarray(y, dtype=float), np.asarray(eta, dtype=float), np.asarray(lam, dtype=float)
        )
        total = self.noise_variance + lam
        log_norm = -0.5 * (y - eta) ** 2 / total - 0.5 * np.log(2.0 * np.pi * total)
        mean = eta + lam * (y - eta) / total
        var = lam * self.noise_variance / total
        return SmoothedMoments(log_norm[()], mean[()], var[()])

    def score_and_curvature(self, y, eta, lam):
        total = self.noise_variance + lam
        score = (np.asarray(y, dtype=float) - eta) / total
        return score, np.full(np.shape(score), -1.0 / total)[()]

    def output_quadrature(self, z, n: int):
        nodes, log_weights = standard_normal_rule(n)
        y = np.asarray(z, dtype=float)[..., None] + np.sqrt(self.noise_variance) * nodes
        return y, np.broadcast_to(np.exp(log_weights), y.shape)

    def predictive_quadrature(self, eta, q: float, n: int = DEFAULTS.HERMITE_NODES):
        nodes, log_weights = standard_normal_rule(n)
        y = np.asarray(eta, dtype=float)[..., None] + np.sqrt(self.noise_variance + q) * nodes
        return y, np.broadcast_to(np.exp(log_weights), y.shape)


class LogisticChannel(BaseChannel):
    """Binary output with ``P(y = 1 | z) = 1 / (1 + e^{-z})``."""

    output_alphabet = (0.0, 1.0)

    def __init__(self):
        super().__init__(MODEL_NAMES.LOGISTIC_CHANNEL, "binary")

    def log_likelihood(self, y, z):
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        return -(y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z))

    def prob_one(self, z):
        return expit(np.asarray(z, dtype=float))

    def sample(self, z, rng):
        p = self.prob_one(z)
        return (rng.random(size=p.shape) < p).astype(float)

    def raw_score(self, y, z):
        return np.asarray(y, dtype=float) - expit(np.asarray(z, dtype=float))

    def raw_curvature(self, y, z):
        z = np.asarray(z, dtype=float)
        curv = -expit(z) * expit(-z)
        return np.broadcast_to(curv, np.broadcast(np.asarray(y), z).shape)[()]


def make_linear_gaussian_channel(noise_variance: float) -> LinearGaussianChannel:
    return LinearGaussianChannel(noise_variance)


def make_logistic_channel() -> LogisticChannel:
    return LogisticChannel()
