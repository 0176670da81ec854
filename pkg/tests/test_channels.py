"""Measurement channels: smoothed likelihoods, scores and predictive rules."""

import numpy as np
import pytest
from scipy.special import expit

from optimal_amp.errors import ContractViolation
from optimal_amp.models.base_channel import BaseChannel
from optimal_amp.models.channels import LinearGaussianChannel, LogisticChannel
from optimal_amp.scalar.quadrature import gaussian_expectation


class TestLinearGaussianChannel:
    def test_closed_form_matches_quadrature(self):
        channel = LinearGaussianChannel(0.5)
        y = np.linspace(-3.0, 3.0, 13)
        eta = 0.4 * y[::-1]
        exact = channel.smoothed_moments(y, eta, 1.3)
        numeric = BaseChannel.smoothed_moments(channel, y, eta, 1.3)
        for a, b in zip(exact, numeric):
            np.testing.assert_allclose(a, b, atol=1e-10)

    def test_score_and_curvature(self):
        channel = LinearGaussianChannel(0.5)
        score, curvature = channel.score_and_curvature(np.array([1.0, 2.0]), np.array([0.0, 0.0]), 1.5)
        np.testing.assert_allclose(score, [0.5, 1.0])
        np.testing.assert_allclose(curvature, [-0.5, -0.5])

    def test_raw_derivatives_match_finite_differences(self):
        channel = LinearGaussianChannel(2.0)
        z = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(channel.raw_score(1.0, z), BaseChannel.raw_score(channel, 1.0, z), atol=1e-8)

    def test_sampling_noise(self, rng):
        channel = LinearGaussianChannel(0.25)
        z = np.zeros(100_000)
        assert np.var(channel.sample(z, rng)) == pytest.approx(0.25, rel=0.03)

    def test_predictive_rule_integrates_to_one(self):
        y, weights = LinearGaussianChannel(0.5).predictive_quadrature(np.array([0.0, 1.0]), 0.5)
        assert y.shape == weights.shape
        np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.sum(weights * y, axis=-1), [0.0, 1.0], atol=1e-12)

    def test_nonpositive_noise_rejected(self):
        with pytest.raises(ContractViolation):
            LinearGaussianChannel(0.0)


class TestLogisticChannel:
    def test_unsmoothed_corrector_example(self):
        """At lambda = 0 the measurement corrector for y = 1 is sigmoid(eta) - 1."""
        eta = np.linspace(-4.0, 4.0, 9)
        score = LogisticChannel().score(1.0, eta, 0.0)
        np.testing.assert_allclose(-score, expit(eta) - 1.0, atol=1e-15)

    def test_smoothed_probabilities_sum_to_one(self):
        channel = LogisticChannel()
        eta = np.linspace(-5.0, 5.0, 11)
        p0 = np.exp(channel.smoothed_log_likelihood(0.0, eta, 2.0))
        p1 = np.exp(channel.smoothed_log_likelihood(1.0, eta, 2.0))
        np.testing.assert_allclose(p0 + p1, 1.0, atol=1e-10)

    def test_smoothed_probability_is_gaussian_average(self):
        channel = LogisticChannel()
        eta = np.array([-2.0, 0.0, 1.5])
        expected = gaussian_expectation(expit, eta, 3.0, n=201)
        np.testing.assert_allclose(np.exp(channel.smoothed_log_likelihood(1.0, eta, 3.0)), expected, rtol=1e-7)

    def test_smoothed_score_signs_and_curvature_bound(self):
        channel = LogisticChannel()
        eta = np.linspace(-6.0, 6.0, 25)
        lam = 2.0
        s1, c1 = channel.score_and_curvature(1.0, eta, lam)
        s0, c0 = channel.score_and_curvature(0.0, eta, lam)
        assert np.all(s1 > 0.0) and np.all(s0 < 0.0)
        for c in (c0, c1):
            assert np.all(c < 0.0)
            assert np.all(c > -1.0 / lam)

    def test_raw_curvature_broadcasts(self):
        curvature = LogisticChannel().raw_curvature(np.array([0.0, 1.0]), 0.0)
        np.testing.assert_allclose(curvature, [-0.25, -0.25])

    def test_binary_predictive_rule(self):
        channel = LogisticChannel()
        y, weights = channel.predictive_quadrature(np.array([0.0, 3.0]), 0.0)
        np.testing.assert_array_equal(y, [[0.0, 1.0], [0.0, 1.0]])
        np.testing.assert_allclose(weights[:, 1], expit([0.0, 3.0]), atol=1e-14)

    def test_sampling_frequency(self, rng):
        channel = LogisticChannel()
        y = channel.sample(np.full(100_000, 1.0), rng)
        assert set(np.unique(y)) <= {0.0, 1.0}
        assert y.mean() == pytest.approx(expit(1.0), abs=0.01)

    def test_is_binary(self):
        assert LogisticChannel().is_binary
        assert not LinearGaussianChannel(1.0).is_binary
