"""Synthetic instances of the generalized linear measurement model with dense iid Gaussian rows."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..constants import DEFAULTS, RNG_ROLES
from ..errors import ContractViolation
from ..gamp.state import ProblemInstance
from ..models.base_channel import BaseChannel
from ..models.base_prior import BasePrior
from ..models.registry import make_channel, make_prior


def make_rng(seed: int, trial: int = 0, role: int = RNG_ROLES.MATRIX) -> np.random.Generator:
    """Counter-based generator for one ``(seed, trial, role)`` stream.

    Streams for different trials or roles are independent, so trials can run in any order or in
    parallel and still draw identical numbers.
    """
    if seed < 0 or trial < 0:
        raise ContractViolation(f"Seeds and trial indices must be nonnegative, got seed={seed}, trial={trial}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, role])))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def balanced_sizes(alpha: float, sqrt_np: float = DEFAULTS.SQRT_NP) -> tuple[int, int]:
    """``(P, N)`` with ``N / P ~ alpha`` and ``sqrt(N P) ~ sqrt_np``."""
    if not alpha > 0.0:
        raise ContractViolation(f"alpha must be positive, got {alpha}")
    return max(1, _round_half_up(sqrt_np / np.sqrt(alpha))), max(1, _round_half_up(sqrt_np * np.sqrt(alpha)))


@dataclass(frozen=True)
class GenConfig:
    """Everything needed to regenerate an instance bit for bit.

    ``N`` defaults to ``round(alpha * P)``; the realised ratio is :attr:`realized_alpha`.
    """

    P: int
    alpha: float
    prior: str
    channel: str
    gamma: float = DEFAULTS.GAMMA
    prior_params: dict = field(default_factory=dict)
    channel_params: dict = field(default_factory=dict)
    seed: int = DEFAULTS.BASE_SEED
    trial: int = 0
    N: int | None = None

    def __post_init__(self):
        if self.P < 1:
            raise ContractViolation(f"P must be at least 1, got {self.P}")
        if not self.alpha > 0.0:
            raise ContractViolation(f"alpha must be positive, got {self.alpha}")
        if not self.gamma > 0.0:
            raise ContractViolation(f"gamma must be positive, got {self.gamma}")
        if self.n_measurements < 1:
            raise ContractViolation(f"alpha={self.alpha} with P={self.P} gives no measurements")

    @classmethod
    def balanced(cls, alpha: float, sqrt_np: float = DEFAULTS.SQRT_NP, **kwargs) -> GenConfig:
        P, N = balanced_sizes(alpha, sqrt_np)
        return cls(P=P, alpha=alpha, N=N, **kwargs)

    @property
    def n_measurements(self) -> int:
        return self.N if self.N is not None else _round_half_up(self.alpha * self.P)

    @property
    def realized_alpha(self) -> float:
        return self.n_measurements / self.P

    def to_dict(self) -> dict:
        d = asdict(self)
        d["N"] = self.n_measurements
        d["realized_alpha"] = self.realized_alpha
        return d


def generate_instance(
    cfg: GenConfig, prior: BasePrior | None = None, channel: BaseChannel | None = None
) -> ProblemInstance:
    """Draw ``X`` with iid ``N(0, gamma / P)`` entries, ``s`` from the prior and ``y`` from the channel at ``X s``."""
    prior = prior or make_prior(cfg.prior, cfg.prior_params)
    channel = channel or make_channel(cfg.channel, cfg.channel_params)
    N, P = cfg.n_measurements, cfg.P

    X = make_rng(cfg.seed, cfg.trial, RNG_ROLES.MATRIX).normal(0.0, np.sqrt(cfg.gamma / P), size=(N, P))
    s_true = np.asarray(prior.sample(make_rng(cfg.seed, cfg.trial, RNG_ROLES.SIGNAL), size=P), dtype=float)
    y = channel.sample(X @ s_true, make_rng(cfg.seed, cfg.trial, RNG_ROLES.OUTPUT))
    return ProblemInstance(X=X, y=np.asarray(y, dtype=float), gamma=cfg.gamma, s_true=s_true, seed=cfg.seed)
