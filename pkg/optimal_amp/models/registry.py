"""Construct priors and channels from their registry names and parameters."""

from __future__ import annotations

from collections.abc import Callable

from ..constants import MODEL_NAMES
from ..errors import ConfigError
from .base_channel import BaseChannel
from .base_prior import BasePrior
from .channels import make_linear_gaussian_channel, make_logistic_channel
from .priors import make_gaussian_mixture_prior, make_gaussian_prior, make_laplace_prior

PRIORS: dict[str, Callable[..., BasePrior]] = {
    MODEL_NAMES.GAUSSIAN_PRIOR: make_gaussian_prior,
    MODEL_NAMES.LAPLACE_PRIOR: make_laplace_prior,
    MODEL_NAMES.GAUSSIAN_MIXTURE_PRIOR: make_gaussian_mixture_prior,
}

CHANNELS: dict[str, Callable[..., BaseChannel]] = {
    MODEL_NAMES.LINEAR_GAUSSIAN_CHANNEL: make_linear_gaussian_channel,
    MODEL_NAMES.LOGISTIC_CHANNEL: make_logistic_channel,
}


def _build(kind: str, table: dict, name: str, params: dict | None):
    if name not in table:
        raise ConfigError(f"Unknown {kind} {name!r}, expected one of {sorted(table)}")
    try:
        return table[name](**(params or {}))
    except TypeError as e:
        raise ConfigError(f"Bad parameters {params} for {kind} {name!r}: {e}") from e


def make_prior(name: str, params: dict | None = None) -> BasePrior:
    return _build("prior", PRIORS, name, params)


def make_channel(name: str, params: dict | None = None) -> BaseChannel:
    return _build("channel", CHANNELS, name, params)
