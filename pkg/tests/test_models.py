"""Log-concavity checks and the model registry."""

import numpy as np
import pytest

from optimal_amp.errors import ConfigError, ContractViolation
from optimal_amp.models.channels import LinearGaussianChannel, LogisticChannel
from optimal_amp.models.concavity import check_log_concavity, is_log_concave_channel, is_log_concave_prior
from optimal_amp.models.priors import GaussianMixturePrior, GaussianPrior, LaplacePrior
from optimal_amp.models.registry import CHANNELS, PRIORS, make_channel, make_prior
from optimal_amp.scalar.functions import ScalarFunction

# -----------------------------------------------------------------------
# Log-concavity
# -----------------------------------------------------------------------


class TestLogConcavity:
    @pytest.mark.parametrize("prior", [GaussianPrior(1.0), LaplacePrior(1.0), GaussianMixturePrior(0.5)])
    def test_log_concave_priors(self, prior):
        assert is_log_concave_prior(prior)

    def test_separated_mixture_is_not_log_concave(self):
        assert not is_log_concave_prior(GaussianMixturePrior(3.0))

    @pytest.mark.parametrize("channel", [LinearGaussianChannel(0.5), LogisticChannel()])
    def test_log_concave_channels(self, channel):
        assert is_log_concave_channel(channel)

    def test_convex_bump_detected(self):
        f = ScalarFunction(fn=lambda x: np.cos(x), name="cos")
        assert not check_log_concavity(f, -1.0, 5.0)

    def test_nonfinite_values_fail(self):
        f = ScalarFunction(fn=lambda x: np.where(x > 0.0, -x, -np.inf), name="half-line")
        assert not check_log_concavity(f, -1.0, 1.0)

    def test_grid_contracts(self):
        f = GaussianPrior(1.0).log_density
        with pytest.raises(ContractViolation):
            check_log_concavity(f, -1.0, 1.0, count=50)
        with pytest.raises(ContractViolation):
            check_log_concavity(f, 1.0, 1.0)


# -----------------------------------------------------------------------
# Registry
# -----------------------------------------------------------------------


class TestRegistry:
    def test_names(self):
        assert set(PRIORS) == {"gaussian", "laplace", "gaussian_mixture"}
        assert set(CHANNELS) == {"linear_gaussian", "logistic"}

    def test_make_prior_with_params(self):
        prior = make_prior("laplace", {"scale": 2.0})
        assert isinstance(prior, LaplacePrior)
        assert prior.variance == pytest.approx(8.0)

    def test_laplace_default_scale(self):
        assert make_prior("laplace").params == {"scale": 1.0}

    def test_make_channel(self):
        assert isinstance(make_channel("logistic"), LogisticChannel)
        assert make_channel("linear_gaussian", {"noise_variance": 0.1}).noise_variance == pytest.approx(0.1)

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="Unknown prior"):
            make_prior("cauchy")
        with pytest.raises(ConfigError, match="Unknown channel"):
            make_channel("probit")

    def test_bad_params(self):
        with pytest.raises(ConfigError):
            make_prior("gaussian", {"scale": 1.0})
        with pytest.raises(ConfigError):
            make_channel("logistic", {"noise_variance": 1.0})

    def test_invalid_value_is_a_contract_violation(self):
        with pytest.raises(ContractViolation):
            make_prior("gaussian", {"variance": -1.0})
