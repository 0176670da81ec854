"""Experiment configuration: YAML (or JSON) files parsed into frozen dataclasses.

Every numerical constant an experiment depends on is materialised here, so that
:meth:`ExperimentConfig.to_dict` echoes the complete setup into each output directory.
"""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field, fields

import yaml

from .constants import CONFIG_KEYS, DEFAULTS, MODE_NAMES, SOLVER_NAMES, THREADS_ENV_VAR
from .errors import ConfigError
from .models.registry import make_channel, make_prior

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NumericsConfig:
    """Tolerances, iteration caps and grid sizes."""

    xtol: float = DEFAULTS.XTOL
    damping: float = DEFAULTS.DAMPING
    lambda_min: float = DEFAULTS.LAMBDA_MIN
    lambda_max: float = DEFAULTS.LAMBDA_MAX
    gamp_tol: float = DEFAULTS.GAMP_TOL
    gamp_max_iters: int = DEFAULTS.GAMP_MAX_ITERS
    se_damping: float = DEFAULTS.SE_DAMPING
    se_tol: float = DEFAULTS.SE_TOL
    se_max_iters: int = DEFAULTS.SE_MAX_ITERS
    se_method: str = DEFAULTS.SE_METHOD
    se_steps: int = DEFAULTS.SE_STEPS
    mc_samples: int = DEFAULTS.MC_SAMPLES
    grid_points: int = DEFAULTS.GRID_POINTS
    y_grid_points: int = DEFAULTS.Y_GRID_POINTS
    y_grid_margin: float = DEFAULTS.Y_GRID_MARGIN

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ConfigError(f"damping must lie in [0, 1), got {self.damping}")
        if not 0.0 <= self.se_damping < 1.0:
            raise ConfigError(f"se_damping must lie in [0, 1), got {self.se_damping}")
        if not 0.0 < self.lambda_min < self.lambda_max:
            raise ConfigError(f"Need 0 < lambda_min < lambda_max, got ({self.lambda_min}, {self.lambda_max})")
        for name in ("xtol", "gamp_tol", "se_tol"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("gamp_max_iters", "se_max_iters", "mc_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.grid_points < 3 or self.y_grid_points < 3:
            raise ConfigError("Tabulation grids need at least 3 points")

    @property
    def lambda_bounds(self) -> tuple[float, float]:
        return (self.lambda_min, self.lambda_max)


@dataclass(frozen=True)
class ModelConfig:
    """Prior and channel selected by registry name."""

    prior: str = "laplace"
    channel: str = "logistic"
    prior_params: dict = field(default_factory=dict)
    channel_params: dict = field(default_factory=dict)

    def __post_init__(self):
        # fail at load time rather than in the middle of a sweep
        make_prior(self.prior, self.prior_params)
        make_channel(self.channel, self.channel_params)

    def build(self):
        return make_prior(self.prior, self.prior_params), make_channel(self.channel, self.channel_params)


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete experiment.

    ``P`` fixes the signal dimension; when it is ``None`` the sizes follow
    ``P = round(sqrt_np / sqrt(alpha))`` and ``N = round(sqrt_np * sqrt(alpha))``.
    """

    mode: str
    model: ModelConfig = field(default_factory=ModelConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    alphas: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    trials: int = DEFAULTS.TRIALS
    seed: int = DEFAULTS.BASE_SEED
    solver: str = SOLVER_NAMES.OPTIMAL
    solvers: tuple[str, ...] = (SOLVER_NAMES.MAP, SOLVER_NAMES.BAMP, SOLVER_NAMES.OPTIMAL)
    gamma: float = DEFAULTS.GAMMA
    P: int | None = None
    sqrt_np: float = DEFAULTS.SQRT_NP
    trial: int = 0
    dump_instance: bool = False
    loss_lambdas: tuple[float, ...] = DEFAULTS.CONSTRUCT_LOSS_LAMBDAS
    regularizer_lambdas: tuple[float, ...] = DEFAULTS.CONSTRUCT_REGULARIZER_LAMBDAS
    construct_y: float = 1.0
    out: str | None = None

    def __post_init__(self):
        if self.mode not in MODE_NAMES:
            raise ConfigError(f"Unknown mode '{self.mode}', expected one of {tuple(MODE_NAMES)}")
        if self.mode in (MODE_NAMES.SE, MODE_NAMES.RUN, MODE_NAMES.SWEEP) and len(self.alphas) == 0:
            raise ConfigError(f"Mode '{self.mode}' needs a non-empty alpha list")
        if any(not a > 0.0 for a in self.alphas):
            raise ConfigError(f"All alpha values must be positive, got {list(self.alphas)}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.seed < 0 or self.trial < 0:
            raise ConfigError(f"seed and trial must be nonnegative, got seed={self.seed}, trial={self.trial}")
        if self.solver not in SOLVER_NAMES:
            raise ConfigError(f"Unknown solver '{self.solver}', expected one of {tuple(SOLVER_NAMES)}")
        unknown = [s for s in self.solvers if s not in SOLVER_NAMES or s == SOLVER_NAMES.ML]
        if unknown or not self.solvers:
            raise ConfigError(f"Sweep solvers must be a non-empty subset of map, bamp, optimal, got {self.solvers}")
        if not self.gamma > 0.0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.P is not None and self.P < 1:
            raise ConfigError(f"P must be at least 1, got {self.P}")
        if any(lam < 0.0 for lam in (*self.loss_lambdas, *self.regularizer_lambdas)):
            raise ConfigError("Smoothing parameters for construct must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.alphas)
        d["solvers"] = list(self.solvers)
        d["loss_lambdas"] = list(self.loss_lambdas)
        d["regularizer_lambdas"] = list(self.regularizer_lambdas)
        return d

    def echo(self) -> dict:
        """The configuration together with every library default, as written to ``config_echo.json``."""
        defaults = {k: list(v) if isinstance(v, tuple) else v for k, v in DEFAULTS._asdict().items()}
        return {"config": self.to_dict(), "defaults": defaults}


def _section(cls, raw, name: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"Section '{name}' must be a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{name}': {unknown}")
    try:
        return cls(**raw)
    except TypeError as e:
        raise ConfigError(f"Invalid section '{name}': {e}") from e


_TUPLE_KEYS = (
    CONFIG_KEYS.ALPHAS_KEY,
    CONFIG_KEYS.SOLVERS_KEY,
    CONFIG_KEYS.LOSS_LAMBDAS_KEY,
    CONFIG_KEYS.REGULARIZER_LAMBDAS_KEY,
)


def config_from_dict(raw: dict, mode: str | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig`; ``mode`` overrides the file's mode."""
    if not isinstance(raw, dict):
        raise ConfigError(f"A configuration must be a mapping, got {type(raw).__name__}")
    raw = dict(raw)
    if mode is not None:
        raw[CONFIG_KEYS.MODE_KEY] = mode
    if CONFIG_KEYS.MODE_KEY not in raw:
        raise ConfigError("The configuration does not name a mode")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"Unknown configuration key(s): {unknown}")

    raw[CONFIG_KEYS.MODEL_KEY] = _section(ModelConfig, raw.get(CONFIG_KEYS.MODEL_KEY), CONFIG_KEYS.MODEL_KEY)
    raw[CONFIG_KEYS.NUMERICS_KEY] = _section(
        NumericsConfig, raw.get(CONFIG_KEYS.NUMERICS_KEY), CONFIG_KEYS.NUMERICS_KEY
    )
    for key in _TUPLE_KEYS:
        if key in raw:
            value = raw[key]
            raw[key] = tuple(value) if isinstance(value, list | tuple) else (value,)
    try:
        return ExperimentConfig(**raw)
    except TypeError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def load_config(path: str | None, mode: str | None = None) -> ExperimentConfig:
    """Read a YAML or JSON configuration file; without a path the defaults of ``mode`` are used."""
    if path is None:
        return config_from_dict({}, mode=mode)
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Configuration file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse configuration file {path}: {e}") from e
    logger.info(f"Loaded configuration from {path}")
    return config_from_dict(raw or {}, mode=mode)


def resolve_threads(cli_threads: int | None = None) -> int:
    """``--threads`` if given, else the ``OPTIMAL_AMP_THREADS`` environment variable, else 1."""
    if cli_threads is not None:
        threads = cli_threads
    else:
        env = os.environ.get(THREADS_ENV_VAR)
        if env is None or env.strip() == "":
            return 1
        try:
            threads = int(env)
        except ValueError as e:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{env}'") from e
    if threads < 1:
        raise ConfigError(f"Thread count must be at least 1, got {threads}")
    return threads
