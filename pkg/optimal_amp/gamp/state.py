from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation

# (lambda, output, argument) -> (value, derivative in the argument)
MeasurementCorrector = Callable[[float, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
# (lambda, argument) -> (value, derivative in the argument)
SignalCorrector = Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]]

CORRECTOR_KINDS = ("mAMP", "bAMP")


@dataclass(frozen=True)
class ProblemInstance:
    """Measurements ``y`` of ``z = X s`` through a channel.

    Parameters
    ----------
    X
        ``N x P`` measurement matrix.
    y
        Outputs, length ``N``.
    gamma
        Expected squared row norm of ``X``.
    s_true
        The signal, kept for diagnostics only.
    seed
        Seed the instance was generated from, if any.
    """

    X: np.ndarray
    y: np.ndarray
    gamma: float
    s_true: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ContractViolation(f"Measurement matrix must be 2-D, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise ContractViolation(f"Outputs of shape {self.y.shape} do not match X of shape {self.X.shape}")
        if self.s_true is not None and self.s_true.shape != (self.X.shape[1],):
            raise ContractViolation(f"Signal of shape {self.s_true.shape} does not match X of shape {self.X.shape}")
        if not self.gamma > 0.0:
            raise ContractViolation(f"gamma must be positive, got {self.gamma}")

    @property
    def N(self) -> int:  # noqa: N802
        return self.X.shape[0]

    @property
    def P(self) -> int:  # noqa: N802
        return self.X.shape[1]

    @property
    def alpha(self) -> float:
        return self.N / self.P

    def row_norm_statistic(self) -> float:
        """``mean_mu ||x_mu||^2``, close to ``gamma`` for a well-normalised matrix."""
        return float(np.mean(np.sum(self.X**2, axis=1)))

    def z_true(self) -> np.ndarray | None:
        return None if self.s_true is None else self.X @ self.s_true


@dataclass(frozen=True)
class CorrectorPair:
    """The scalar maps ``G_y(lambda_eta, y, eta)`` and ``G_s(lambda_h, h)``, each with its derivative."""

    measurement: MeasurementCorrector
    signal: SignalCorrector
    kind: str

    def __post_init__(self):
        if self.kind not in CORRECTOR_KINDS:
            raise ContractViolation(f"Unknown corrector kind {self.kind!r}, expected one of {CORRECTOR_KINDS}")

    def g_y(self, lambda_eta, y, eta):
        return self.measurement(lambda_eta, y, eta)[0]

    def dg_y(self, lambda_eta, y, eta):
        return self.measurement(lambda_eta, y, eta)[1]

    def g_s(self, lambda_h, h):
        return self.signal(lambda_h, h)[0]

    def dg_s(self, lambda_h, h):
        return self.signal(lambda_h, h)[1]


@dataclass(frozen=True)
class GampState:
    """State between two gAMP steps.

    Before step ``t``: ``s_hat`` is the estimate entering the step, ``eta`` the measurement-side
    iterate of the previous step (whose corrector gives the memory term), ``eta_prev`` the one
    before it, ``lambda_eta`` the smoothing used in step ``t`` and ``lambda_eta_prev`` the one
    that produced ``eta``. ``lambda_h`` is the signal-side smoothing of the previous step and is
    ``nan`` before the first step.
    """

    s_hat: np.ndarray
    eta: np.ndarray
    eta_prev: np.ndarray
    lambda_eta: float
    lambda_eta_prev: float
    lambda_h: float
    iteration: int

    @classmethod
    def initial(cls, inst: ProblemInstance, lambda_eta: float, s_hat: np.ndarray | None = None) -> GampState:
        """Zero estimate and zero measurement iterates; the first step has no memory term."""
        if not lambda_eta > 0.0:
            raise ContractViolation(f"Initial lambda_eta must be positive, got {lambda_eta}")
        s0 = np.zeros(inst.P) if s_hat is None else np.array(s_hat, dtype=float)
        zeros = np.zeros(inst.N)
        return cls(s0, zeros, zeros, float(lambda_eta), float(lambda_eta), float("nan"), 0)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.s_hat)) and np.all(np.isfinite(self.eta)))


@dataclass(frozen=True)
class GampSummary:
    """Per-step record of a run.

    ``q_s`` and ``q_eta`` are the empirical errors of ``s_hat`` (entering the step) and of the
    step's ``eta`` against ``X s_true``; they are ``nan`` without a recorded signal.
    """

    t: int
    lambda_eta: float
    lambda_h: float
    delta: float
    q_s: float = float("nan")
    q_eta: float = float("nan")
    s_hat: np.ndarray | None = field(default=None, repr=False)
    eta: np.ndarray | None = field(default=None, repr=False)

    def as_row(self) -> dict:
        return {
            "t": self.t,
            "q_s": self.q_s,
            "q_eta": self.q_eta,
            "lambda_eta": self.lambda_eta,
            "lambda_h": self.lambda_h,
            "delta": self.delta,
        }
