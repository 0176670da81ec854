"""Exception hierarchy shared by the library and the command-line harness."""

from __future__ import annotations

from typing import Any


class AmpError(Exception):
    """Root of every error raised by ``optimal_amp``."""

    exit_code = 2


class ConfigError(AmpError, ValueError):
    """Invalid configuration file, unknown key or bad command-line usage."""

    exit_code = 1


class ContractViolation(AmpError, ValueError):
    """A documented precondition does not hold (e.g. a non-log-concave model)."""

    exit_code = 1


class NumericalFailure(AmpError, ArithmeticError):
    """A numerical routine failed to produce a finite, converged result."""

    exit_code = 2


class MinimizerFailure(NumericalFailure):
    """The 1-D minimiser could not bracket or refine the minimum.

    Args:
        message: Human readable description.
        lower: Lower bracket end(s) at the time of failure.
        upper: Upper bracket end(s) at the time of failure.
    """

    def __init__(self, message: str, lower: Any = None, upper: Any = None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class QuadratureFailure(NumericalFailure):
    """A quadrature rule returned a non-finite value."""


class DeconvolutionError(NumericalFailure):
    """The Moreau inversion is near-singular (smoothed curvature close to -1/lambda)."""


class DivergenceError(NumericalFailure):
    """A gAMP iterate became non-finite."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class InvalidStateError(NumericalFailure):
    """A state-evolution state left its admissible region."""


class NonConvergenceError(NumericalFailure):
    """A fixed-point iteration ran out of iterations.

    Args:
        message: Human readable description.
        last_states: The last two iterates, newest last.
    """

    def __init__(self, message: str, last_states: tuple = ()):
        super().__init__(message)
        self.last_states = last_states


class SelftestFailure(AmpError):
    """At least one selftest suite failed."""

    exit_code = 3
