"""Spline tables with kink splitting and quadratic continuation."""

import numpy as np
import pytest

from optimal_amp.errors import ContractViolation, NumericalFailure
from optimal_amp.estimators.tabulated import TabulatedFunction, symmetric_grid
from optimal_amp.scalar.functions import absolute_value, quadratic


class TestSymmetricGrid:
    def test_odd_count_has_exact_zero(self):
        grid = symmetric_grid(3.3, 11)
        assert grid[5] == 0.0
        np.testing.assert_allclose(grid, -grid[::-1], atol=1e-15)

    def test_even_count_has_no_centre(self):
        assert 0.0 not in symmetric_grid(1.0, 10)


class TestTabulatedFunction:
    def test_quadratic_reproduced_inside_and_beyond_grid(self):
        table = TabulatedFunction.from_function(quadratic(), symmetric_grid(5.0, 51))
        x = np.linspace(-12.0, 12.0, 97)
        np.testing.assert_allclose(table(x), 0.5 * x**2, atol=1e-9)
        np.testing.assert_allclose(table.deriv(x), x, atol=1e-9)
        np.testing.assert_allclose(table.second_deriv(x), 1.0, atol=1e-7)

    def test_kink_is_split(self):
        table = TabulatedFunction.from_function(absolute_value(), symmetric_grid(4.0, 41))
        assert table.kinks == (0.0,)
        x = np.array([-6.0, -0.05, 0.05, 6.0])
        np.testing.assert_allclose(table(x), np.abs(x), atol=1e-12)
        np.testing.assert_allclose(table.deriv(x), np.sign(x), atol=1e-12)

    def test_kink_off_the_grid_is_ignored(self):
        table = TabulatedFunction(symmetric_grid(1.0, 11), np.linspace(0.0, 1.0, 11), kinks=(0.05,))
        assert table.kinks == ()

    def test_scalar_input_returns_scalar(self):
        table = TabulatedFunction.from_function(quadratic(), symmetric_grid(2.0, 21))
        assert np.ndim(table(1.0)) == 0

    def test_convexity(self):
        grid = symmetric_grid(2.0, 21)
        assert TabulatedFunction(grid, grid**2).is_convex()
        assert not TabulatedFunction(grid, -(grid**2)).is_convex()

    def test_concave_ends_continue_linearly(self):
        grid = symmetric_grid(2.0, 21)
        table = TabulatedFunction(grid, -(grid**2))
        assert table.second_deriv(5.0) == 0.0

    def test_anchored(self):
        grid = symmetric_grid(2.0, 21)
        table = TabulatedFunction(grid, grid**2 + 3.0).anchored()
        assert table.values.min() == 0.0

    def test_to_function_and_frame(self):
        grid = symmetric_grid(2.0, 21)
        table = TabulatedFunction(grid, grid**2, name="sq")
        f = table.to_function()
        assert f.convex and f.name == "sq"
        assert f.deriv(1.0) == pytest.approx(2.0, abs=1e-9)
        frame = table.to_frame()
        assert list(frame.columns) == ["x", "value", "derivative"]
        assert len(frame) == 21

    def test_contracts(self):
        with pytest.raises(ContractViolation):
            TabulatedFunction([0.0, 1.0, 2.0], [0.0, 1.0, 4.0])
        with pytest.raises(ContractViolation):
            TabulatedFunction([0.0, 2.0, 1.0, 3.0], [0.0, 1.0, 4.0, 9.0])
        with pytest.raises(NumericalFailure):
            TabulatedFunction([0.0, 1.0, 2.0, 3.0], [0.0, np.inf, 4.0, 9.0])
