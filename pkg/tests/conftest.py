"""Shared fixtures: small Gaussian models and instances that keep the suite fast."""

import numpy as np
import pytest

from optimal_amp.config import ExperimentConfig, ModelConfig, NumericsConfig
from optimal_amp.data.generate import GenConfig, generate_instance
from optimal_amp.models.channels import make_linear_gaussian_channel, make_logistic_channel
from optimal_amp.models.priors import make_gaussian_prior, make_laplace_prior

PRIOR_VARIANCE = 1.0
NOISE_VARIANCE = 0.5


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def gaussian_prior():
    return make_gaussian_prior(PRIOR_VARIANCE)


@pytest.fixture
def gaussian_channel():
    return make_linear_gaussian_channel(NOISE_VARIANCE)


@pytest.fixture
def laplace_prior():
    return make_laplace_prior(1.0)


@pytest.fixture
def logistic_channel():
    return make_logistic_channel()


@pytest.fixture
def gaussian_instance(gaussian_prior, gaussian_channel):
    """``P = 100``, ``alpha = 2`` instance of the Gaussian prior / Gaussian channel pair."""
    gc = GenConfig(P=100, alpha=2.0, prior="gaussian", channel="linear_gaussian", seed=7)
    return generate_instance(gc, gaussian_prior, gaussian_channel)


@pytest.fixture
def gaussian_model():
    return ModelConfig(
        prior="gaussian",
        channel="linear_gaussian",
        prior_params={"variance": PRIOR_VARIANCE},
        channel_params={"noise_variance": NOISE_VARIANCE},
    )


@pytest.fixture
def small_numerics():
    return NumericsConfig(grid_points=401, y_grid_points=21, gamp_max_iters=300)


@pytest.fixture
def gaussian_config(gaussian_model, small_numerics):
    """A sweep-ready configuration on the Gaussian pair with small sizes."""
    return ExperimentConfig(
        mode="sweep",
        model=gaussian_model,
        numerics=small_numerics,
        alphas=(2.0,),
        trials=2,
        P=40,
        solvers=("map", "bamp", "optimal"),
    )
