"""The ``se``, ``run``, ``sweep`` and ``construct`` commands."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config import ExperimentConfig
from ..constants import SOLVER_NAMES
from ..data.generate import GenConfig, generate_instance
from ..data.io import dump_instance
from ..errors import ConfigError, DivergenceError, NumericalFailure
from ..estimators.families import LossFamily
from ..estimators.optimal import (
    construct_optimal_loss,
    construct_optimal_loss_family,
    construct_optimal_regularizer,
    loss_grid_half_width,
)
from ..estimators.tabulated import TabulatedFunction, symmetric_grid
from ..gamp.correctors import make_bamp_correctors, make_mamp_correctors
from ..gamp.diagnostics import stationarity_residual
from ..gamp.engine import run_gamp
from ..gamp.state import GampSummary, ProblemInstance
from ..models.base_channel import BaseChannel
from ..models.base_prior import BasePrior
from ..scalar.functions import ScalarFunction, SmoothingParams, constant
from ..state_evolution.recursion import SeState, bamp_se_fixed_point, bamp_se_trajectory, optimal_smoothing_params
from .records import SWEEP_COLUMNS, SweepRecord, save_csv, save_json, summarize_sweep

logger = logging.getLogger(__name__)

SE_TRAJECTORY_FILE = "se_trajectory.csv"
SE_FIXED_POINT_FILE = "se_fixed_point.csv"
TRAJECTORY_FILE = "trajectory.csv"
RESULT_FILE = "result.json"
INSTANCE_FILE = "instance.bin"
SWEEP_FILE = "sweep.csv"
SUMMARY_FILE = "summary.json"
CONSTRUCT_FILE = "construct.csv"
CONFIG_ECHO_FILE = "config_echo.json"

_MAMP_SOLVERS = (SOLVER_NAMES.MAP, SOLVER_NAMES.OPTIMAL, SOLVER_NAMES.ML)


@dataclass(frozen=True)
class Estimator:
    """A loss family and regulariser ready for mAMP."""

    loss: LossFamily
    reg: ScalarFunction


@dataclass(frozen=True)
class SolverResult:
    s_hat: np.ndarray
    trajectory: list[GampSummary]
    converged: bool
    stationarity_residual: float
    se_prediction: float


def gen_config(cfg: ExperimentConfig, alpha: float, trial: int) -> GenConfig:
    """Instance sizes from ``P`` when configured, else from the ``sqrt(N P)`` rule."""
    common = {
        "prior": cfg.model.prior,
        "channel": cfg.model.channel,
        "gamma": cfg.gamma,
        "prior_params": cfg.model.prior_params,
        "channel_params": cfg.model.channel_params,
        "seed": cfg.seed,
        "trial": trial,
    }
    if cfg.P is not None:
        return GenConfig(P=cfg.P, alpha=alpha, **common)
    return GenConfig.balanced(alpha, cfg.sqrt_np, **common)


def se_fixed_point(cfg: ExperimentConfig, prior: BasePrior, channel: BaseChannel, alpha: float) -> SeState:
    num = cfg.numerics
    return bamp_se_fixed_point(
        prior,
        channel,
        alpha,
        cfg.gamma,
        tol=num.se_tol,
        max_iters=num.se_max_iters,
        method=num.se_method,
        mc_samples=num.mc_samples,
        seed=cfg.seed,
        damping=num.se_damping,
    )


def build_estimator(
    cfg: ExperimentConfig,
    solver: str,
    prior: BasePrior,
    channel: BaseChannel,
    params: SmoothingParams | None = None,
    y_observed=None,
) -> Estimator:
    """Loss family and regulariser of an M-estimation solver.

    ``map`` uses the unsmoothed negative log-densities, ``ml`` drops the regulariser and ``optimal``
    smooths both sides with ``params``.
    """
    num = cfg.numerics
    grid = symmetric_grid(loss_grid_half_width(prior.variance, cfg.gamma), num.grid_points)
    lambda_eta = params.lambda_eta if solver == SOLVER_NAMES.OPTIMAL else 0.0
    loss = construct_optimal_loss_family(
        channel, lambda_eta, y_observed, grid, y_count=num.y_grid_points, y_margin=num.y_grid_margin
    )
    if solver == SOLVER_NAMES.ML:
        return Estimator(loss, constant(0.0))
    lambda_h = params.lambda_h if solver == SOLVER_NAMES.OPTIMAL else 0.0
    return Estimator(loss, construct_optimal_regularizer(prior, lambda_h, count=num.grid_points).to_function())


def run_solver(
    cfg: ExperimentConfig,
    inst: ProblemInstance,
    solver: str,
    prior: BasePrior,
    channel: BaseChannel,
    fp: SeState | None = None,
    estimator: Estimator | None = None,
) -> SolverResult:
    """Run one solver on one instance.

    Args:
        cfg: Experiment configuration.
        inst: The instance.
        solver: One of ``map``, ``optimal``, ``bamp`` and ``ml``.
        prior: Signal prior.
        channel: Measurement channel.
        fp: State-evolution fixed point at the instance's alpha; needed by ``optimal`` and ``bamp``.
        estimator: Prebuilt loss and regulariser of an M-estimation solver.
    """
    num = cfg.numerics
    se_prediction = float("nan")
    if solver in (SOLVER_NAMES.OPTIMAL, SOLVER_NAMES.BAMP):
        if fp is None:
            raise ConfigError(f"Solver '{solver}' needs the state-evolution fixed point")
        se_prediction = fp.q_s / prior.variance

    if solver == SOLVER_NAMES.BAMP:
        correctors = make_bamp_correctors(channel, prior)
    else:
        if estimator is None:
            params = optimal_smoothing_params(fp, cfg.gamma) if solver == SOLVER_NAMES.OPTIMAL else None
            estimator = build_estimator(cfg, solver, prior, channel, params, inst.y)
        correctors = make_mamp_correctors(estimator.loss, estimator.reg)

    s_hat, trajectory, converged = run_gamp(
        inst,
        correctors,
        max_iters=num.gamp_max_iters,
        tol=num.gamp_tol,
        damping=num.damping,
        prior_variance=prior.variance,
        lambda_bounds=num.lambda_bounds,
    )
    residual = float("nan")
    if solver in _MAMP_SOLVERS:
        residual = stationarity_residual(s_hat, inst, estimator.loss, estimator.reg)
    return SolverResult(s_hat, trajectory, converged, residual, se_prediction)


def normalized_mse(s_hat: np.ndarray, inst: ProblemInstance, prior: BasePrior) -> float:
    return float(np.mean((s_hat - inst.s_true) ** 2) / prior.variance)


def _echo(cfg: ExperimentConfig, out: str):
    save_json(cfg.echo(), out, CONFIG_ECHO_FILE)


def cmd_se(cfg: ExperimentConfig, out: str) -> dict[str, str]:
    """State-evolution trajectory from the zero-knowledge start and fixed point for every alpha."""
    prior, channel = cfg.model.build()
    num = cfg.numerics
    trajectory_rows, fixed_point_rows = [], []
    for alpha in cfg.alphas:
        logger.info(f"State evolution of {prior.name}/{channel.name} at alpha={alpha}")
        states = bamp_se_trajectory(
            prior,
            channel,
            alpha,
            cfg.gamma,
            n_steps=num.se_steps,
            method=num.se_method,
            mc_samples=num.mc_samples,
            seed=cfg.seed,
        )
        trajectory_rows.extend({"alpha": alpha, **s.as_row()} for s in states)
        fp = se_fixed_point(cfg, prior, channel, alpha)
        fixed_point_rows.append(
            {"alpha": alpha, **fp.as_row(), "residual_q_s": fp.residual_q_s, "residual_q_h": fp.residual_q_h}
        )
    _echo(cfg, out)
    return {
        "trajectory": save_csv(trajectory_rows, out, SE_TRAJECTORY_FILE),
        "fixed_point": save_csv(fixed_point_rows, out, SE_FIXED_POINT_FILE),
    }


def cmd_run(cfg: ExperimentConfig, out: str) -> dict[str, str]:
    """One instance, one solver: per-step trajectory plus a result summary."""
    if len(cfg.alphas) != 1:
        raise ConfigError(f"Mode 'run' takes exactly one alpha, got {list(cfg.alphas)}")
    prior, channel = cfg.model.build()
    gc = gen_config(cfg, cfg.alphas[0], cfg.trial)
    inst = generate_instance(gc, prior, channel)
    logger.info(f"Running {cfg.solver} on N={inst.N}, P={inst.P} (trial {cfg.trial})")

    fp = None
    if cfg.solver in (SOLVER_NAMES.OPTIMAL, SOLVER_NAMES.BAMP):
        fp = se_fixed_point(cfg, prior, channel, inst.alpha)
    result = run_solver(cfg, inst, cfg.solver, prior, channel, fp)

    _echo(cfg, out)
    paths = {"trajectory": save_csv([s.as_row() for s in result.trajectory], out, TRAJECTORY_FILE)}
    paths["result"] = save_json(
        {
            "solver": cfg.solver,
            "alpha": inst.alpha,
            "P": inst.P,
            "N": inst.N,
            "trial": cfg.trial,
            "mse_normalized": normalized_mse(result.s_hat, inst, prior),
            "iterations": len(result.trajectory),
            "converged": result.converged,
            "stationarity_residual": result.stationarity_residual,
            "se_prediction": result.se_prediction,
        },
        out,
        RESULT_FILE,
    )
    if cfg.dump_instance:
        path = os.path.join(out, INSTANCE_FILE)
        dump_instance(inst, path, gc.to_dict())
        paths["instance"] = path
    return paths


def _run_trial(
    cfg: ExperimentConfig,
    alpha: float,
    trial: int,
    prior: BasePrior,
    channel: BaseChannel,
    fp: SeState,
    estimators: dict[str, Estimator],
) -> list[SweepRecord]:
    gc = gen_config(cfg, alpha, trial)
    inst = generate_instance(gc, prior, channel)
    records = []
    for solver in cfg.solvers:
        try:
            result = run_solver(cfg, inst, solver, prior, channel, fp, estimators.get(solver))
            mse = normalized_mse(result.s_hat, inst, prior)
            iterations, converged = len(result.trajectory), result.converged
            residual, prediction = result.stationarity_residual, result.se_prediction
        except NumericalFailure as e:
            logger.warning(f"{solver} failed at alpha={alpha}, trial={trial}: {e}")
            mse, converged, residual = float("nan"), False, float("nan")
            iterations = e.iteration if isinstance(e, DivergenceError) else 0
            prediction = fp.q_s / prior.variance if solver != SOLVER_NAMES.MAP else float("nan")
        records.append(
            SweepRecord(
                alpha=alpha,
                solver=solver,
                trial=trial,
                seed=cfg.seed,
                P=inst.P,
                N=inst.N,
                mse_normalized=mse,
                iterations=iterations,
                converged=converged,
                stationarity_residual=residual,
                se_prediction=prediction,
            )
        )
    return records


def cmd_sweep(cfg: ExperimentConfig, out: str, threads: int = 1) -> dict[str, str]:
    """MAP, bAMP and optimal M-estimation over alphas and trials.

    Trials run on ``threads`` workers; rows are ordered by ``(alpha, solver, trial)`` whatever the
    completion order. A failing run is recorded with ``converged = false`` and the sweep goes on.
    """
    prior, channel = cfg.model.build()
    solver_rank = {s: i for i, s in enumerate(cfg.solvers)}
    jobs = []
    for alpha in cfg.alphas:
        realized_alpha = gen_config(cfg, alpha, 0).realized_alpha
        fp = se_fixed_point(cfg, prior, channel, realized_alpha)
        logger.info(f"alpha={alpha}: state-evolution MSE {fp.q_s / prior.variance:.6g}")
        estimators = {}
        if channel.is_binary:
            # binary loss tables do not depend on the observed outputs
            params = optimal_smoothing_params(fp, cfg.gamma)
            estimators = {
                s: build_estimator(cfg, s, prior, channel, params) for s in cfg.solvers if s in _MAMP_SOLVERS
            }
        jobs.extend((alpha, trial, fp, estimators) for trial in range(cfg.trials))

    records: list[SweepRecord] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_trial, cfg, a, t, prior, channel, fp, est) for a, t, fp, est in jobs]
        for future in tqdm(as_completed(futures), total=len(futures), desc="trials"):
            records.extend(future.result())
    records.sort(key=lambda r: (r.alpha, solver_rank[r.solver], r.trial))

    _echo(cfg, out)
    sweep_path = save_csv([r.as_row() for r in records], out, SWEEP_FILE, columns=SWEEP_COLUMNS)
    summary_path = save_json({"summary": summarize_sweep(records)}, out, SUMMARY_FILE)
    return {"sweep": sweep_path, "summary": summary_path}


def construct_curves(cfg: ExperimentConfig) -> list[tuple[str, float, TabulatedFunction]]:
    """Optimal losses at ``construct_y`` and optimal regularisers for the configured smoothing lists."""
    prior, channel = cfg.model.build()
    num = cfg.numerics
    curves = []
    loss_grid = symmetric_grid(loss_grid_half_width(prior.variance, cfg.gamma), num.grid_points)
    for lam in cfg.loss_lambdas:
        curves.append(("loss", lam, construct_optimal_loss(channel, cfg.construct_y, lam, loss_grid)))
    for lam in cfg.regularizer_lambdas:
        curves.append(("regularizer", lam, construct_optimal_regularizer(prior, lam, count=num.grid_points)))
    return curves


def cmd_construct(cfg: ExperimentConfig, out: str) -> dict[str, str]:
    """Plot-ready curve families of the optimal loss and regulariser.

    Raises:
        NumericalFailure: If an emitted curve is not convex.
    """
    frames = []
    for kind, lam, table in construct_curves(cfg):
        if not table.is_convex():
            raise NumericalFailure(f"Constructed {table.name} is not convex")
        frame = table.to_frame()
        frame.insert(0, "lambda", lam)
        frame.insert(0, "function", kind)
        frames.append(frame)
    _echo(cfg, out)
    return {"curves": save_csv(pd.concat(frames, ignore_index=True), out, CONSTRUCT_FILE)}
