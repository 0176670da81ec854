"""Losses ``L(y, eta)`` indexed by the measurement output ``y``."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np

from ..errors import ContractViolation
from ..models.base_channel import BaseChannel
from ..scalar.functions import ScalarFunction
from .tabulated import TabulatedFunction


class LossFamily(ABC):
    """Base class for per-output losses.

    :meth:`bind` turns the family into a single :class:`ScalarFunction` of ``eta`` that reads the
    output of each element from a fixed array, which is how the message-passing code applies one
    proximal map to all measurements at once.
    """

    name: str = "loss"

    @abstractmethod
    def evaluate(self, y: np.ndarray, eta: np.ndarray, nu: int) -> np.ndarray:
        """``nu``-th derivative in ``eta`` of ``L(y, eta)``; ``y`` and ``eta`` have equal shapes."""

    @property
    def kinks(self) -> tuple[float, ...]:
        return ()

    def bind(self, y) -> ScalarFunction:
        y = np.asarray(y, dtype=float)

        def make(nu):
            def fn(eta):
                eta_b, y_b = np.broadcast_arrays(np.asarray(eta, dtype=float), y)
                return self.evaluate(y_b, eta_b, nu)

            return fn

        return ScalarFunction(fn=make(0), dfn=make(1), d2fn=make(2), convex=True, kinks=self.kinks, name=self.name)

    def at(self, y: float) -> ScalarFunction:
        return self.bind(float(y))


class BinaryLossFamily(LossFamily):
    """One table per output symbol."""

    def __init__(self, tables: dict[float, TabulatedFunction], name: str = "loss"):
        self.tables = {float(k): v for k, v in tables.items()}
        self.name = name

    @property
    def kinks(self):
        return tuple(sorted({k for t in self.tables.values() for k in t.kinks}))

    def evaluate(self, y, eta, nu):
        out = np.full(eta.shape, np.nan)
        for symbol, table in self.tables.items():
            mask = y == symbol
            if mask.any():
                out[mask] = table.evaluate(eta[mask], nu)
        if np.isnan(out).any():
            raise ContractViolation(f"Outputs outside the alphabet {sorted(self.tables)} passed to {self.name}")
        return out[()]


class GridLossFamily(LossFamily):
    """Tables on an increasing ``y``-grid, linearly interpolated in ``y``.

    A convex combination of convex functions of ``eta`` is convex, so the family stays convex
    between rows. Outputs beyond the grid use the end rows.
    """

    def __init__(self, y_grid, tables: list[TabulatedFunction], name: str = "loss"):
        self.y_grid = np.asarray(y_grid, dtype=float)
        if self.y_grid.size != len(tables) or self.y_grid.size < 2:
            raise ContractViolation(f"{name} needs one table per y-grid point and at least two rows")
        self.tables = list(tables)
        self.name = name

    def evaluate(self, y, eta, nu):
        idx = np.clip(np.searchsorted(self.y_grid, y, side="right") - 1, 0, self.y_grid.size - 2)
        w = np.clip((y - self.y_grid[idx]) / (self.y_grid[idx + 1] - self.y_grid[idx]), 0.0, 1.0)
        out = np.zeros(eta.shape)
        for k in np.unique(np.concatenate([np.ravel(idx), np.ravel(idx) + 1])):
            lower = idx == k
            if lower.any():
                out[lower] += (1.0 - w[lower]) * self.tables[k].evaluate(eta[lower], nu)
            upper = idx + 1 == k
            if upper.any():
                out[upper] += w[upper] * self.tables[k].evaluate(eta[upper], nu)
        return out[()]


class AnalyticLossFamily(LossFamily):
    """A family given by closed-form ``(y, eta)`` functions and their first two ``eta``-derivatives."""

    def __init__(self, fn: Callable, dfn: Callable, d2fn: Callable, name: str = "loss"):
        self._fns = (fn, dfn, d2fn)
        self.name = name

    def evaluate(self, y, eta, nu):
        return np.asarray(self._fns[nu](y, eta), dtype=float)[()]


def quadratic_loss_family(noise_variance: float = 1.0) -> AnalyticLossFamily:
    """``(y - eta)^2 / (2 noise_variance)``."""
    v = float(noise_variance)
    return AnalyticLossFamily(
        fn=lambda y, eta: 0.5 * (y - eta) ** 2 / v,
        dfn=lambda y, eta: (eta - y) / v,
        d2fn=lambda y, eta: np.full(np.shape(eta), 1.0 / v),
        name=f"quadratic(noise_variance={v:g})",
    )


def negative_log_likelihood_family(channel: BaseChannel) -> AnalyticLossFamily:
    """The exact MAP loss ``-log P(y | eta)`` with the channel's own derivatives."""
    return AnalyticLossFamily(
        fn=lambda y, eta: -channel.log_likelihood(y, eta),
        dfn=lambda y, eta: -channel.raw_score(y, eta),
        d2fn=lambda y, eta: -np.broadcast_to(channel.raw_curvature(y, eta), np.shape(eta)),
        name=f"-log {channel.name}",
    )
