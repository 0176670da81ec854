"""Factories for the mAMP (M-estimation) and bAMP (Bayesian) corrector pairs."""

from __future__ import annotations

import numpy as np

from ..estimators.families import LossFamily
from ..models.base_channel import BaseChannel
from ..models.base_prior import BasePrior
from ..scalar.functions import ScalarFunction
from ..scalar.proximal import prox, prox_derivative
from .state import CorrectorPair


def make_mamp_correctors(loss: LossFamily, reg: ScalarFunction) -> CorrectorPair:
    """Correctors of M-estimation with a convex loss family and a convex regulariser.

    ``G_y`` is the derivative of the Moreau envelope of ``L(y, .)``, i.e. ``(eta - prox) / lambda``,
    with derivative ``(1 - prox') / lambda``; ``G_s`` is the proximal map of the regulariser.
    """

    def measurement(lambda_eta, y, eta):
        f = loss.bind(y)
        p = prox(f, lambda_eta, eta)
        dp = prox_derivative(f, lambda_eta, eta, p=p)
        return (eta - p) / lambda_eta, (1.0 - dp) / lambda_eta

    def signal(lambda_h, h):
        p = prox(reg, lambda_h, h)
        return p, prox_derivative(reg, lambda_h, h, p=p)

    return CorrectorPair(measurement, signal, kind="mAMP")


def make_bamp_correctors(channel: BaseChannel, prior: BasePrior) -> CorrectorPair:
    """Correctors of MMSE inference.

    ``G_y`` is minus the score of the smoothed likelihood ``P_y(y | eta, lambda_eta)`` and ``G_s``
    the scalar posterior mean, whose derivative is ``Var[s | h] / lambda_h``.
    """

    def measurement(lambda_eta, y, eta):
        score, curvature = channel.score_and_curvature(y, eta, lambda_eta)
        return -score, -curvature

    def signal(lambda_h, h):
        if lambda_h == 0.0:
            h = np.asarray(h, dtype=float)
            return h, np.ones_like(h)
        m = prior.smoothed_moments(lambda_h, h)
        return m.mean, m.var / lambda_h

    return CorrectorPair(measurement, signal, kind="bAMP")
