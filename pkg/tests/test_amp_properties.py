"""Fixed points and statistical properties of mAMP and bAMP runs, mostly on logistic + Laplace."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from scipy.stats import kurtosis

from optimal_amp.config import ExperimentConfig, NumericsConfig
from optimal_amp.data.generate import GenConfig, generate_instance
from optimal_amp.gamp.correctors import make_bamp_correctors, make_mamp_correctors
from optimal_amp.gamp.engine import gamp_step, run_gamp
from optimal_amp.gamp.state import GampState, ProblemInstance
from optimal_amp.harness.commands import build_estimator, cmd_sweep, gen_config, run_solver, se_fixed_point
from optimal_amp.harness.selftest import ridge_solution
from optimal_amp.scalar.functions import SmoothingParams

TOL = 1e-8


@pytest.fixture
def logistic_laplace_config():
    return ExperimentConfig(mode="run", numerics=NumericsConfig(gamp_tol=TOL, gamp_max_iters=2000))


def _logistic_laplace(P: int, alpha: float, **kwargs) -> GenConfig:
    return GenConfig(P=P, alpha=alpha, prior="laplace", channel="logistic", **kwargs)


def _settled_state(inst, correctors, prior_variance, max_steps=2000):
    """Iterate damped gAMP until ``s_hat`` stops moving and return the full state."""
    state = GampState.initial(inst, inst.gamma * prior_variance)
    for _ in range(max_steps):
        new = gamp_step(state, inst, correctors, damping=0.2)
        if state.iteration > 0 and np.max(np.abs(new.s_hat - state.s_hat)) <= 1e-11:
            return new
        state = new
    raise AssertionError(f"{correctors.kind} did not settle in {max_steps} steps")


def _relative_move(new, old):
    return np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old))


# -----------------------------------------------------------------------
# Stationarity of converged M-estimation runs
# -----------------------------------------------------------------------


class TestStationarity:
    def test_map_does_not_stop_at_the_zero_start(self, logistic_laplace_config, laplace_prior, logistic_channel):
        # the first prox of the Laplace regulariser zeroes every coordinate
        cfg = logistic_laplace_config
        inst = generate_instance(gen_config(cfg, 0.5, 0), laplace_prior, logistic_channel)
        result = run_solver(cfg, inst, "map", laplace_prior, logistic_channel)
        assert result.converged
        assert len(result.trajectory) > 1
        assert result.stationarity_residual <= 100 * TOL

    @pytest.mark.slow
    @pytest.mark.parametrize("solver", ["map", "optimal"])
    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_converged_runs_are_stationary(
        self, logistic_laplace_config, laplace_prior, logistic_channel, solver, alpha
    ):
        cfg = logistic_laplace_config
        inst = generate_instance(gen_config(cfg, alpha, 1), laplace_prior, logistic_channel)
        fp = se_fixed_point(cfg, laplace_prior, logistic_channel, inst.alpha)
        result = run_solver(cfg, inst, solver, laplace_prior, logistic_channel, fp)
        assert result.converged
        assert result.stationarity_residual <= 100 * TOL


# -----------------------------------------------------------------------
# Fixed points
# -----------------------------------------------------------------------


class TestFixedPoints:
    def test_step_at_ridge_solution(self, gaussian_instance, gaussian_prior, gaussian_channel):
        inst = gaussian_instance
        c = make_bamp_correctors(gaussian_channel, gaussian_prior)
        state = _settled_state(inst, c, gaussian_prior.variance)
        oracle = ridge_solution(inst.X, inst.y, gaussian_prior.variance, gaussian_channel.noise_variance)
        np.testing.assert_allclose(state.s_hat, oracle, atol=1e-8)
        moved = gamp_step(replace(state, s_hat=oracle), inst, c)
        assert np.max(np.abs(moved.s_hat - oracle)) <= 1e-8

    def test_optimal_mamp_holds_bamp_fixed_point_gaussian(
        self, gaussian_config, gaussian_instance, gaussian_prior, gaussian_channel
    ):
        inst = gaussian_instance
        state = _settled_state(inst, make_bamp_correctors(gaussian_channel, gaussian_prior), gaussian_prior.variance)
        params = SmoothingParams(lambda_eta=state.lambda_eta, lambda_h=state.lambda_h)
        est = build_estimator(gaussian_config, "optimal", gaussian_prior, gaussian_channel, params, inst.y)
        moved = gamp_step(state, inst, make_mamp_correctors(est.loss, est.reg))
        assert _relative_move(moved.s_hat, state.s_hat) <= 1e-6

    @pytest.mark.slow
    def test_optimal_mamp_holds_bamp_fixed_point(self, logistic_laplace_config, laplace_prior, logistic_channel):
        cfg = logistic_laplace_config
        inst = generate_instance(_logistic_laplace(200, 2.0, seed=3), laplace_prior, logistic_channel)
        state = _settled_state(inst, make_bamp_correctors(logistic_channel, laplace_prior), laplace_prior.variance)
        params = SmoothingParams(lambda_eta=state.lambda_eta, lambda_h=state.lambda_h)
        est = build_estimator(cfg, "optimal", laplace_prior, logistic_channel, params)
        mamp = make_mamp_correctors(est.loss, est.reg)
        # two steps: the second also runs the memory term through the mAMP measurement corrector
        once = gamp_step(state, inst, mamp)
        twice = gamp_step(once, inst, mamp)
        assert _relative_move(once.s_hat, state.s_hat) <= 1e-4
        assert _relative_move(twice.s_hat, once.s_hat) <= 1e-4


# -----------------------------------------------------------------------
# Symmetry and the state-evolution premise
# -----------------------------------------------------------------------


def test_permutation_equivariance(laplace_prior, logistic_channel):
    inst = generate_instance(_logistic_laplace(100, 2.0, seed=5), laplace_prior, logistic_channel)
    perm = np.random.default_rng(0).permutation(inst.P)
    permuted = ProblemInstance(X=inst.X[:, perm], y=inst.y, gamma=inst.gamma, s_true=inst.s_true[perm])
    c = make_bamp_correctors(logistic_channel, laplace_prior)
    kw = {"max_iters": 30, "tol": 0.0, "prior_variance": laplace_prior.variance}
    s_hat, _, _ = run_gamp(inst, c, **kw)
    s_perm, _, _ = run_gamp(permuted, c, **kw)
    np.testing.assert_allclose(s_perm, s_hat[perm], atol=1e-9)


@pytest.mark.slow
def test_measurement_residuals_are_gaussian(laplace_prior, logistic_channel):
    c = make_bamp_correctors(logistic_channel, laplace_prior)
    steps = 5
    residuals = [[] for _ in range(steps)]
    for trial in range(3):
        inst = generate_instance(_logistic_laplace(2000, 2.0, trial=trial), laplace_prior, logistic_channel)
        _, trajectory, _ = run_gamp(
            inst, c, max_iters=steps, tol=0.0, prior_variance=laplace_prior.variance, keep_iterates=True
        )
        z = inst.z_true()
        for t, summary in enumerate(trajectory):
            residuals[t].append(summary.eta - z)
    for t in range(steps):
        assert abs(kurtosis(np.concatenate(residuals[t]))) <= 0.15, f"iteration {t}"


# -----------------------------------------------------------------------
# MSE against alpha
# -----------------------------------------------------------------------


@pytest.mark.slow
def test_optimal_m_estimation_beats_map(tmp_path):
    alphas = (0.5, 1.0, 2.0, 4.0)
    cfg = ExperimentConfig(mode="sweep", alphas=alphas, trials=20)
    paths = cmd_sweep(cfg, str(tmp_path), threads=4)
    summary = {(row["alpha"], row["solver"]): row for row in json.loads(Path(paths["summary"]).read_text())["summary"]}
    for alpha in alphas:
        opt, mapr, bamp = (summary[(alpha, s)] for s in ("optimal", "map", "bamp"))
        assert opt["mse_mean"] <= mapr["mse_mean"], alpha
        if alpha <= 2.0:
            assert mapr["mse_mean"] - opt["mse_mean"] > max(opt["mse_se"], mapr["mse_se"]), alpha
        assert abs(opt["mse_mean"] - opt["se_prediction"]) <= 3 * opt["mse_se"], alpha
        assert abs(bamp["mse_mean"] - opt["mse_mean"]) <= 2 * max(opt["mse_se"], bamp["mse_se"]), alpha
        # the Bayes-optimal error predicted by state evolution sits below MAP
        assert bamp["se_prediction"] <= mapr["mse_mean"], alpha

    sweep = pd.read_csv(paths["sweep"])
    converged = sweep[sweep["solver"].isin(["map", "optimal"]) & sweep["converged"]]
    assert len(converged) > 0
    assert (converged["stationarity_residual"] <= 100 * cfg.numerics.gamp_tol).all()
