"""Tabulated scalar functions.

Constructed optimal losses and regularisers have no closed form, so they are stored on a uniform
grid and interpolated with cubic splines. Beyond the grid the function continues as the quadratic
that matches value, slope and (nonnegative) curvature at the nearest end, which keeps tables of
convex functions convex everywhere.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from ..constants import DEFAULTS
from ..errors import ContractViolation, NumericalFailure
from ..scalar.functions import ScalarFunction


def symmetric_grid(half_width: float, count: int = DEFAULTS.GRID_POINTS) -> np.ndarray:
    """Uniform grid on ``[-half_width, half_width]``; odd ``count`` puts a knot exactly at zero."""
    grid = np.linspace(-half_width, half_width, count)
    if count % 2:
        grid[count // 2] = 0.0
    return grid


class TabulatedFunction:
    """A convex function known on a grid, interpolated by cubic splines.

    Parameters
    ----------
    grid
        Strictly increasing knots.
    values
        Function values at the knots.
    kinks
        Knots where the function is not differentiable; the spline is split there so each side is
        interpolated separately.
    name
        Label used in logs and reports.
    """

    def __init__(self, grid, values, kinks: tuple[float, ...] = (), name: str = "tabulated"):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 4:
            raise ContractViolation(f"Table {name} needs matching 1-D grid and values with at least 4 points")
        if not np.all(np.diff(grid) > 0.0):
            raise ContractViolation(f"Grid of table {name} is not strictly increasing")
        if not np.all(np.isfinite(values)):
            raise NumericalFailure(f"Table {name} has non-finite values")
        self.grid = grid
        self.values = values
        self.name = name

        tol = 1e-9 * max(1.0, np.abs(grid).max())
        cuts = []
        for kink in kinks:
            i = int(np.argmin(np.abs(grid - kink)))
            if 0 < i < grid.size - 1 and abs(grid[i] - kink) <= tol:
                cuts.append(i)
        cuts = sorted(set(cuts))
        self.kinks = tuple(float(grid[i]) for i in cuts)
        self._breaks = np.array(self.kinks)
        bounds = [0, *cuts, grid.size - 1]
        self._pieces = [CubicSpline(grid[a : b + 1], values[a : b + 1]) for a, b in zip(bounds[:-1], bounds[1:])]

        first, last = self._pieces[0], self._pieces[-1]
        lo, hi = grid[0], grid[-1]
        self._left = (values[0], float(first(lo, 1)), max(float(first(lo, 2)), 0.0))
        self._right = (values[-1], float(last(hi, 1)), max(float(last(hi, 2)), 0.0))

    @classmethod
    def from_function(cls, f: ScalarFunction, grid, name: str | None = None) -> TabulatedFunction:
        grid = np.asarray(grid, dtype=float)
        return cls(grid, f.eval(grid), kinks=f.kinks, name=name or f.name)

    def evaluate(self, x, nu: int):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty_like(flat)
        lo, hi = self.grid[0], self.grid[-1]

        inside = (flat >= lo) & (flat <= hi)
        piece_idx = np.searchsorted(self._breaks, flat, side="right")
        for k, piece in enumerate(self._pieces):
            mask = inside & (piece_idx == k)
            if mask.any():
                out[mask] = piece(flat[mask], nu)

        for end, (v, s, c), mask in ((lo, self._left, flat < lo), (hi, self._right, flat > hi)):
            if mask.any():
                d = flat[mask] - end
                out[mask] = (v + s * d + 0.5 * c * d**2, s + c * d, np.full_like(d, c))[nu]
        return out.reshape(x.shape)[()]

    def __call__(self, x):
        return self.evaluate(x, 0)

    def eval(self, x):
        return self.evaluate(x, 0)

    def deriv(self, x):
        return self.evaluate(x, 1)

    def second_deriv(self, x):
        return self.evaluate(x, 2)

    def second_differences(self) -> np.ndarray:
        return np.diff(self.values, 2)

    def is_convex(self, tol: float = DEFAULTS.CONVEXITY_TOL) -> bool:
        return bool(np.all(self.second_differences() >= -tol))

    def anchored(self) -> TabulatedFunction:
        """Same function shifted so that its minimum over the grid is zero."""
        return TabulatedFunction(self.grid, self.values - self.values.min(), self.kinks, self.name)

    def to_function(self) -> ScalarFunction:
        return ScalarFunction(
            fn=self.eval,
            dfn=self.deriv,
            d2fn=self.second_deriv,
            domain=(-np.inf, np.inf),
            convex=self.is_convex(),
            kinks=self.kinks,
            name=self.name,
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.grid, "value": self.values, "derivative": self.deriv(self.grid)})

    def __repr__(self) -> str:
        return f"TabulatedFunction({self.name!r}, [{self.grid[0]:g}, {self.grid[-1]:g}], n={self.grid.size})"
