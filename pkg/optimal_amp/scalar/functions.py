"""One-dimensional function objects used throughout the library."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..constants import DEFAULTS
from ..errors import ContractViolation

ArrayFn = Callable[[np.ndarray], np.ndarray]


def fd_step(x: np.ndarray, rel_step: float = DEFAULTS.FD_STEP) -> np.ndarray:
    """Central-difference step ``rel_step * max(1, |x|)``."""
    return rel_step * np.maximum(1.0, np.abs(x))


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one real variable, evaluated element-wise on arrays.

    Parameters
    ----------
    fn
        Vectorised evaluation ``x -> f(x)``.
    dfn
        Analytic first derivative. When missing, central finite differences are used.
    d2fn
        Analytic second derivative. When missing, central differences of :meth:`deriv` are used.
    domain
        Closed interval on which ``fn`` is finite.
    convex
        Convexity asserted by whoever builds the function.
    kinks
        Points where ``fn`` is not differentiable (subgradient selection happens there).
    name
        Label used in logs and reports.
    """

    fn: ArrayFn
    dfn: ArrayFn | None = None
    d2fn: ArrayFn | None = None
    domain: tuple[float, float] = (-np.inf, np.inf)
    convex: bool = False
    kinks: tuple[float, ...] = ()
    rel_step: float = DEFAULTS.FD_STEP
    name: str = field(default="f", compare=False)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        return self.fn(np.asarray(x, dtype=float))

    @property
    def has_analytic_deriv(self) -> bool:
        return self.dfn is not None

    @property
    def has_second_deriv(self) -> bool:
        return self.d2fn is not None and not self.kinks

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.dfn is not None:
            return self.dfn(x)
        h = fd_step(x, self.rel_step)
        return (self.fn(x + h) - self.fn(x - h)) / (2.0 * h)

    def second_deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.d2fn is not None:
            return self.d2fn(x)
        h = fd_step(x, self.rel_step)
        return (self.deriv(x + h) - self.deriv(x - h)) / (2.0 * h)

    def one_sided_derivs(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Left and right derivatives by one-sided differences (used at kinks)."""
        x = np.asarray(x, dtype=float)
        h = fd_step(x, self.rel_step)
        fx = self.fn(x)
        left = (fx - self.fn(x - h)) / h
        right = (self.fn(x + h) - fx) / h
        return left, right

    def shifted(self, offset: float) -> ScalarFunction:
        """Return ``f + offset`` with the same derivatives."""
        fn = self.fn
        return ScalarFunction(
            fn=lambda x: fn(x) + offset,
            dfn=self.dfn,
            d2fn=self.d2fn,
            domain=self.domain,
            convex=self.convex,
            kinks=self.kinks,
            rel_step=self.rel_step,
            name=self.name,
        )


@dataclass(frozen=True)
class SmoothingParams:
    """Measurement- and signal-side smoothing variances (zero means no smoothing)."""

    lambda_eta: float
    lambda_h: float

    def __post_init__(self):
        if not (self.lambda_eta >= 0.0 and self.lambda_h >= 0.0):
            raise ContractViolation(
                f"Smoothing parameters must be nonnegative, got lambda_eta={self.lambda_eta}, "
                f"lambda_h={self.lambda_h}"
            )


# Catalogue of convex test functions


def absolute_value() -> ScalarFunction:
    return ScalarFunction(
        fn=np.abs,
        dfn=np.sign,
        d2fn=np.zeros_like,
        convex=True,
        kinks=(0.0,),
        name="abs",
    )


def quadratic(center: float = 0.0, curvature: float = 1.0) -> ScalarFunction:
    """``curvature * (x - center)^2 / 2``."""
    return ScalarFunction(
        fn=lambda x: 0.5 * curvature * (x - center) ** 2,
        dfn=lambda x: curvature * (x - center),
        d2fn=lambda x: np.full_like(x, curvature, dtype=float),
        convex=curvature >= 0.0,
        name="quadratic",
    )


def constant(value: float = 0.0) -> ScalarFunction:
    return ScalarFunction(
        fn=lambda x: np.full_like(x, value, dtype=float),
        dfn=np.zeros_like,
        d2fn=np.zeros_like,
        convex=True,
        name="constant",
    )


def huber(delta: float = 1.0) -> ScalarFunction:
    def fn(x):
        ax = np.abs(x)
        return np.where(ax <= delta, 0.5 * x**2, delta * (ax - 0.5 * delta))

    return ScalarFunction(
        fn=fn,
        dfn=lambda x: np.clip(x, -delta, delta),
        d2fn=lambda x: (np.abs(x) < delta).astype(float),
        convex=True,
        name="huber",
    )


def logistic_nll() -> ScalarFunction:
    """Negative log-likelihood of ``y = 1`` under a logistic link: ``log(1 + e^{-x})``."""
    return ScalarFunction(
        fn=lambda x: np.logaddexp(0.0, -x),
        dfn=lambda x: expit(x) - 1.0,
        d2fn=lambda x: expit(x) * expit(-x),
        convex=True,
        name="logistic_nll",
    )


CONVEX_CATALOGUE: dict[str, Callable[[], ScalarFunction]] = {
    "abs": absolute_value,
    "logistic_nll": logistic_nll,
    "huber": huber,
    "quadratic": quadratic,
}
