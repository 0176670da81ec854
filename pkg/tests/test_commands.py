"""The se, run, sweep and construct commands on small Gaussian problems."""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from optimal_amp.config import ExperimentConfig, ModelConfig
from optimal_amp.data.io import load_instance
from optimal_amp.errors import ConfigError
from optimal_amp.harness.commands import (
    build_estimator,
    cmd_construct,
    cmd_run,
    cmd_se,
    cmd_sweep,
    gen_config,
    run_solver,
)
from optimal_amp.harness.records import SWEEP_COLUMNS
from optimal_amp.harness.selftest import gaussian_se_root

# -----------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------


class TestGenConfig:
    def test_fixed_dimension(self, gaussian_config):
        gc = gen_config(gaussian_config, 2.0, trial=1)
        assert (gc.P, gc.n_measurements, gc.trial) == (40, 80, 1)
        assert gc.prior_params == {"variance": 1.0}

    def test_sqrt_np_rule(self, gaussian_config):
        gc = gen_config(replace(gaussian_config, P=None, sqrt_np=50.0), 4.0, trial=0)
        assert (gc.P, gc.n_measurements) == (25, 100)


class TestBuildEstimator:
    def test_ml_has_no_regularizer(self, gaussian_config, gaussian_prior, gaussian_channel):
        est = build_estimator(gaussian_config, "ml", gaussian_prior, gaussian_channel, y_observed=np.array([0.0, 1.0]))
        np.testing.assert_array_equal(est.reg(np.array([-3.0, 0.0, 3.0])), 0.0)

    def test_map_regularizer_is_quadratic(self, gaussian_config, gaussian_prior, gaussian_channel):
        est = build_estimator(gaussian_config, "map", gaussian_prior, gaussian_channel, y_observed=np.array([0.0]))
        x = np.linspace(-2.0, 2.0, 5)
        np.testing.assert_allclose(est.reg(x), x**2 / 2.0, atol=1e-6)

    def test_fixed_point_required(self, gaussian_config, gaussian_instance, gaussian_prior, gaussian_channel):
        with pytest.raises(ConfigError):
            run_solver(gaussian_config, gaussian_instance, "optimal", gaussian_prior, gaussian_channel)


# -----------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------


class TestCmdSe:
    def test_outputs(self, gaussian_config, tmp_path):
        cfg = replace(gaussian_config, mode="se", alphas=(1.0, 2.0))
        paths = cmd_se(cfg, str(tmp_path))
        trajectory = pd.read_csv(paths["trajectory"])
        assert list(trajectory.columns) == ["alpha", "t", "q_s", "q_eta", "q_h", "lambda_eta", "lambda_h"]
        steps = cfg.numerics.se_steps
        assert len(trajectory) == 2 * (steps + 1)
        fixed = pd.read_csv(paths["fixed_point"])
        assert fixed["alpha"].tolist() == [1.0, 2.0]
        for alpha, q_s in zip(fixed["alpha"], fixed["q_s"], strict=True):
            assert q_s == pytest.approx(gaussian_se_root(1.0, 0.5, alpha, 1.0), abs=1e-8)
        assert (tmp_path / "config_echo.json").exists()


class TestCmdRun:
    def test_outputs(self, gaussian_config, tmp_path):
        cfg = replace(gaussian_config, mode="run", solver="bamp", dump_instance=True)
        paths = cmd_run(cfg, str(tmp_path))
        result = json.loads(Path(paths["result"]).read_text())
        assert set(result) == {
            "solver",
            "alpha",
            "P",
            "N",
            "trial",
            "mse_normalized",
            "iterations",
            "converged",
            "stationarity_residual",
            "se_prediction",
        }
        assert (result["P"], result["N"], result["solver"]) == (40, 80, "bamp")
        assert result["converged"] is True
        assert result["stationarity_residual"] is None
        assert 0.0 < result["mse_normalized"] < 1.0
        trajectory = pd.read_csv(paths["trajectory"])
        assert len(trajectory) == result["iterations"]
        inst = load_instance(paths["instance"])
        assert inst.X.shape == (80, 40)

    def test_map_reports_stationarity(self, gaussian_config, tmp_path):
        cfg = replace(gaussian_config, mode="run", solver="map")
        result = json.loads(Path(cmd_run(cfg, str(tmp_path))["result"]).read_text())
        assert result["se_prediction"] is None
        assert result["stationarity_residual"] < 1e-4

    def test_needs_single_alpha(self, gaussian_config, tmp_path):
        with pytest.raises(ConfigError):
            cmd_run(replace(gaussian_config, mode="run", alphas=(1.0, 2.0)), str(tmp_path))


class TestCmdSweep:
    def test_rows_and_summary(self, gaussian_config, tmp_path):
        paths = cmd_sweep(gaussian_config, str(tmp_path), threads=2)
        sweep = pd.read_csv(paths["sweep"])
        assert list(sweep.columns) == SWEEP_COLUMNS
        assert sweep["solver"].tolist() == ["map", "map", "bamp", "bamp", "optimal", "optimal"]
        assert sweep["trial"].tolist() == [0, 1, 0, 1, 0, 1]
        assert sweep["converged"].all()
        # on the Gaussian pair all three solvers compute the posterior mean
        by_solver = sweep.pivot(index="trial", columns="solver", values="mse_normalized")
        np.testing.assert_allclose(by_solver["map"], by_solver["bamp"], rtol=1e-3)
        np.testing.assert_allclose(by_solver["optimal"], by_solver["bamp"], rtol=1e-3)
        assert sweep.loc[sweep["solver"] == "map", "se_prediction"].isna().all()

        summary = json.loads(Path(paths["summary"]).read_text())["summary"]
        assert [row["solver"] for row in summary] == ["bamp", "map", "optimal"]
        assert all(row["trials"] == 2 for row in summary)

    def test_thread_count_does_not_change_results(self, gaussian_config, tmp_path):
        cfg = replace(gaussian_config, solvers=("bamp",), trials=3)
        one = cmd_sweep(cfg, str(tmp_path / "one"), threads=1)["sweep"]
        three = cmd_sweep(cfg, str(tmp_path / "three"), threads=3)["sweep"]
        assert Path(one).read_bytes() == Path(three).read_bytes()


class TestCmdConstruct:
    def test_curves(self, gaussian_config, tmp_path):
        cfg = replace(gaussian_config, mode="construct", loss_lambdas=(0.0, 2.0), regularizer_lambdas=(1.0,))
        curves = pd.read_csv(cmd_construct(cfg, str(tmp_path))["curves"])
        assert list(curves.columns) == ["function", "lambda", "x", "value", "derivative"]
        points = cfg.numerics.grid_points
        assert len(curves) == 3 * points
        assert curves.groupby(["function", "lambda"]).size().tolist() == [points] * 3
        reg = curves[curves["function"] == "regularizer"]
        np.testing.assert_allclose(reg["value"], reg["x"] ** 2 / 2.0, atol=1e-5)

    def test_logistic_laplace(self, small_numerics, tmp_path):
        cfg = ExperimentConfig(
            mode="construct",
            model=ModelConfig(prior="laplace", channel="logistic"),
            numerics=small_numerics,
            loss_lambdas=(0.0, 2.0),
            regularizer_lambdas=(0.0, 1.0),
        )
        curves = pd.read_csv(cmd_construct(cfg, str(tmp_path))["curves"])
        at_zero = curves[(curves["function"] == "regularizer") & (curves["lambda"] == 0.0)]
        np.testing.assert_allclose(at_zero["value"], np.abs(at_zero["x"]), atol=1e-12)
        # the Laplace prior has variance 2
        losses = curves[curves["function"] == "loss"]
        assert losses["x"].max() == pytest.approx(12.0 * np.sqrt(2.0))
