"""Scalar function objects, their derivatives and the convex catalogue."""

import numpy as np
import pytest

from optimal_amp.errors import ContractViolation
from optimal_amp.scalar.functions import (
    CONVEX_CATALOGUE,
    ScalarFunction,
    SmoothingParams,
    absolute_value,
    constant,
    huber,
    logistic_nll,
    quadratic,
)


class TestScalarFunction:
    def test_finite_difference_derivatives(self):
        f = ScalarFunction(fn=np.sin, name="sin")
        x = np.linspace(-3.0, 3.0, 41)
        assert not f.has_analytic_deriv
        np.testing.assert_allclose(f.deriv(x), np.cos(x), atol=1e-8)
        np.testing.assert_allclose(f.second_deriv(x), -np.sin(x), atol=1e-4)

    def test_analytic_derivatives_are_used(self):
        f = quadratic(center=1.0, curvature=3.0)
        x = np.array([-2.0, 0.0, 5.0])
        np.testing.assert_array_equal(f.deriv(x), 3.0 * (x - 1.0))
        np.testing.assert_array_equal(f.second_deriv(x), np.full(3, 3.0))
        assert f.has_second_deriv

    def test_kinked_function_has_no_global_second_derivative(self):
        assert not absolute_value().has_second_deriv

    def test_one_sided_derivatives_at_kink(self):
        left, right = absolute_value().one_sided_derivs(np.array([0.0]))
        np.testing.assert_allclose(left, -1.0)
        np.testing.assert_allclose(right, 1.0)

    def test_shifted_keeps_derivatives(self):
        f = logistic_nll()
        g = f.shifted(2.5)
        x = np.linspace(-4.0, 4.0, 9)
        np.testing.assert_allclose(g(x), f(x) + 2.5)
        np.testing.assert_array_equal(g.deriv(x), f.deriv(x))


class TestSmoothingParams:
    def test_zero_is_allowed(self):
        params = SmoothingParams(0.0, 0.0)
        assert params.lambda_eta == 0.0

    @pytest.mark.parametrize(("lambda_eta", "lambda_h"), [(-1.0, 1.0), (1.0, -1e-12), (float("nan"), 1.0)])
    def test_negative_or_nan_rejected(self, lambda_eta, lambda_h):
        with pytest.raises(ContractViolation):
            SmoothingParams(lambda_eta, lambda_h)


class TestCatalogue:
    @pytest.mark.parametrize("name", sorted(CONVEX_CATALOGUE))
    def test_convex_on_a_grid(self, name):
        f = CONVEX_CATALOGUE[name]()
        x = np.linspace(-10.0, 10.0, 2001)
        values = f(x)
        assert f.convex
        assert np.all(np.diff(values, 2) >= -1e-12)

    @pytest.mark.parametrize("name", ["logistic_nll", "huber", "quadratic"])
    def test_analytic_derivative_matches_finite_differences(self, name):
        f = CONVEX_CATALOGUE[name]()
        x = np.linspace(-5.0, 5.0, 101) + 0.013
        h = 1e-6
        fd = (f(x + h) - f(x - h)) / (2.0 * h)
        np.testing.assert_allclose(f.deriv(x), fd, atol=1e-7)

    def test_huber_pieces(self):
        f = huber(2.0)
        np.testing.assert_allclose(f(np.array([1.0, 3.0, -3.0])), [0.5, 4.0, 4.0])

    def test_logistic_nll_is_stable_for_large_arguments(self):
        f = logistic_nll()
        np.testing.assert_allclose(f(np.array([-800.0, 800.0])), [800.0, 0.0], atol=1e-300)

    def test_constant(self):
        f = constant(1.5)
        np.testing.assert_array_equal(f(np.zeros(3)), [1.5, 1.5, 1.5])
        np.testing.assert_array_equal(f.deriv(np.ones(2)), [0.0, 0.0])
