from typing import NamedTuple


class _MODEL_NAMES_NT(NamedTuple):
    GAUSSIAN_PRIOR: str = "gaussian"
    LAPLACE_PRIOR: str = "laplace"
    GAUSSIAN_MIXTURE_PRIOR: str = "gaussian_mixture"
    LINEAR_GAUSSIAN_CHANNEL: str = "linear_gaussian"
    LOGISTIC_CHANNEL: str = "logistic"


class _SOLVER_NAMES_NT(NamedTuple):
    MAP: str = "map"
    OPTIMAL: str = "optimal"
    BAMP: str = "bamp"
    ML: str = "ml"


class _MODE_NAMES_NT(NamedTuple):
    SE: str = "se"
    RUN: str = "run"
    SWEEP: str = "sweep"
    CONSTRUCT: str = "construct"
    SELFTEST: str = "selftest"


class _CONFIG_KEYS_NT(NamedTuple):
    MODE_KEY: str = "mode"
    MODEL_KEY: str = "model"
    NUMERICS_KEY: str = "numerics"
    PRIOR_KEY: str = "prior"
    PRIOR_PARAMS_KEY: str = "prior_params"
    CHANNEL_KEY: str = "channel"
    CHANNEL_PARAMS_KEY: str = "channel_params"
    ALPHAS_KEY: str = "alphas"
    TRIALS_KEY: str = "trials"
    SEED_KEY: str = "seed"
    SOLVER_KEY: str = "solver"
    SOLVERS_KEY: str = "solvers"
    GAMMA_KEY: str = "gamma"
    P_KEY: str = "P"
    SQRT_NP_KEY: str = "sqrt_np"
    TRIAL_KEY: str = "trial"
    DUMP_INSTANCE_KEY: str = "dump_instance"
    LOSS_LAMBDAS_KEY: str = "loss_lambdas"
    REGULARIZER_LAMBDAS_KEY: str = "regularizer_lambdas"
    CONSTRUCT_Y_KEY: str = "construct_y"
    OUT_KEY: str = "out"


class _RNG_ROLES_NT(NamedTuple):
    """Stream identifiers; one independent generator per (trial, role)."""

    MATRIX: int = 0
    SIGNAL: int = 1
    OUTPUT: int = 2
    MONTE_CARLO: int = 3


class _DEFAULTS_NT(NamedTuple):
    # 1-D minimiser
    XTOL: float = 1e-10
    MAX_MINIMIZER_ITERS: int = 200
    # quadrature
    HERMITE_NODES: int = 61
    FALLBACK_RTOL: float = 1e-6
    FALLBACK_HALF_WIDTH: float = 10.0
    # finite differences: h = FD_STEP * max(1, |x|)
    FD_STEP: float = 1e-5
    # below this smoothing variance channel scores use the unsmoothed likelihood
    RAW_SMOOTHING_CUTOFF: float = 1e-7
    # gAMP
    DAMPING: float = 0.2
    LAMBDA_MIN: float = 1e-10
    LAMBDA_MAX: float = 1e10
    GAMP_TOL: float = 1e-8
    GAMP_MAX_ITERS: int = 500
    # state evolution
    SE_DAMPING: float = 0.5
    SE_TOL: float = 1e-10
    SE_MAX_ITERS: int = 2000
    SE_METHOD: str = "quadrature"
    MC_SAMPLES: int = 1_000_000
    # tabulation
    GRID_POINTS: int = 2001
    GRID_HALF_WIDTH_FACTOR: float = 12.0
    Y_GRID_POINTS: int = 201
    Y_GRID_MARGIN: float = 0.2
    CONCAVITY_TOL: float = 1e-8
    CONVEXITY_TOL: float = 1e-8
    # experiments
    GAMMA: float = 1.0
    LAPLACE_SCALE: float = 1.0
    TRIALS: int = 20
    BASE_SEED: int = 0
    SQRT_NP: float = 250.0
    SE_STEPS: int = 20
    CONSTRUCT_LOSS_LAMBDAS: tuple = (0.0, 2.0, 4.0, 6.0)
    CONSTRUCT_REGULARIZER_LAMBDAS: tuple = (0.0, 0.5, 1.0, 2.0)


MODEL_NAMES = _MODEL_NAMES_NT()
SOLVER_NAMES = _SOLVER_NAMES_NT()
MODE_NAMES = _MODE_NAMES_NT()
CONFIG_KEYS = _CONFIG_KEYS_NT()
RNG_ROLES = _RNG_ROLES_NT()
DEFAULTS = _DEFAULTS_NT()

THREADS_ENV_VAR = "OPTIMAL_AMP_THREADS"
