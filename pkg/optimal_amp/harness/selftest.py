"""Numerical self-checks runnable from the command line.

Each suite returns its largest residual and is compared against a fixed threshold. The report is a
JSON document listing every suite, so a failing build shows which identity broke and by how much.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from ..config import ExperimentConfig, ModelConfig
from ..constants import SOLVER_NAMES
from ..data.generate import GenConfig, generate_instance
from ..errors import AmpError, SelftestFailure
from ..estimators.optimal import (
    construct_optimal_loss,
    construct_optimal_regularizer,
    roundtrip_check,
    verify_moreau_inversion,
)
from ..gamp.correctors import make_bamp_correctors
from ..gamp.engine import run_gamp
from ..models.channels import make_linear_gaussian_channel, make_logistic_channel
from ..models.priors import make_gaussian_prior, make_laplace_prior
from ..scalar.functions import CONVEX_CATALOGUE, ScalarFunction
from ..scalar.proximal import moreau, moreau_grad, prox
from ..state_evolution.empirical import empirical_state
from ..state_evolution.recursion import bamp_se_fixed_point, bamp_se_trajectory
from .commands import run_solver, se_fixed_point
from .records import save_json

logger = logging.getLogger(__name__)

SELFTEST_FILE = "selftest.json"

# envelope second derivatives jump (Huber from |x| at |x| = lam); this step keeps the
# central difference quotient within tolerance next to those points
_ENVELOPE_FD_STEP = 1e-6


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_residual: float
    threshold: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.max_residual <= self.threshold)

    def as_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "passed": self.passed,
            "error": self.error,
        }


def _derivative_free(f: ScalarFunction) -> ScalarFunction:
    return ScalarFunction(fn=f.fn, kinks=f.kinks, convex=f.convex, name=f"{f.name}[no derivatives]")


def suite_prox_moreau(xtol: float) -> float:
    """Prox-envelope relation and the envelope gradient against finite differences.

    Every catalogued function is checked with and without its analytic derivatives, so the plain
    bracketing search is exercised at tolerance ``xtol``.
    """
    x = np.linspace(-10.0, 10.0, 201)
    worst = 0.0
    for make in CONVEX_CATALOGUE.values():
        for f in (make(), _derivative_free(make())):
            for lam in (0.1, 1.0, 10.0):
                p = prox(f, lam, x, xtol=xtol)
                g = moreau_grad(f, lam, x, p=p)
                worst = max(worst, float(np.max(np.abs(p - (x - lam * g)))))
                h = _ENVELOPE_FD_STEP * np.maximum(1.0, np.abs(x))
                fd = (moreau(f, lam, x + h, xtol=xtol) - moreau(f, lam, x - h, xtol=xtol)) / (2.0 * h)
                worst = max(worst, float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(fd)))))
    return worst


def suite_moreau_inversion() -> float:
    grid = np.linspace(-8.0, 8.0, 161)
    worst = 0.0
    for name in ("quadratic", "abs", "logistic_nll"):
        for q in (0.5, 2.0):
            worst = max(worst, verify_moreau_inversion(CONVEX_CATALOGUE[name](), q, grid))
    return worst


def suite_roundtrip() -> float:
    channel, prior = make_logistic_channel(), make_laplace_prior(1.0)
    worst = 0.0
    for lam in (0.0, 2.0, 4.0, 6.0):
        worst = max(worst, roundtrip_check(channel, lam, y=1.0))
    for lam in (0.0, 0.5, 1.0, 2.0):
        worst = max(worst, roundtrip_check(prior, lam))
    return worst


def suite_gaussian_constructions() -> float:
    """Optimal loss and regulariser of the Gaussian pair equal the quadratic MAP forms."""
    noise, variance, y = 0.5, 2.0, 0.3
    worst = 0.0
    for lam in (0.5, 2.0):
        loss = construct_optimal_loss(make_linear_gaussian_channel(noise), y, lam)
        expected = (y - loss.grid) ** 2 / (2.0 * noise)
        worst = max(worst, float(np.max(np.abs(loss.values - (expected - expected.min())))))
        reg = construct_optimal_regularizer(make_gaussian_prior(variance), lam)
        expected = reg.grid**2 / (2.0 * variance)
        worst = max(worst, float(np.max(np.abs(reg.values - (expected - expected.min())))))
    return worst


def gaussian_se_root(variance: float, noise: float, alpha: float, gamma: float) -> float:
    """Root of ``q = (1 / variance + alpha gamma / (noise + gamma q))^{-1}`` by bracketing."""

    def gap(q):
        return q - 1.0 / (1.0 / variance + alpha * gamma / (noise + gamma * q))

    return brentq(gap, 0.0, variance, xtol=1e-15, rtol=1e-15)


def suite_gaussian_se() -> float:
    worst = 0.0
    for alpha in (0.5, 1.0, 2.0, 4.0):
        fp = bamp_se_fixed_point(make_gaussian_prior(2.0), make_linear_gaussian_channel(0.5), alpha, 1.0, tol=1e-12)
        worst = max(worst, abs(fp.q_s - gaussian_se_root(2.0, 0.5, alpha, 1.0)))
    return worst


def ridge_solution(X: np.ndarray, y: np.ndarray, variance: float, noise: float) -> np.ndarray:
    """Posterior mean ``(X^T X / noise + I / variance)^{-1} X^T y / noise``."""
    A = X.T @ X / noise + np.eye(X.shape[1]) / variance
    return np.linalg.solve(A, X.T @ y / noise)


def suite_gaussian_solvers(cfg: ExperimentConfig) -> float:
    """MAP, bAMP and optimal mAMP against the ridge solution on a small Gaussian instance."""
    variance, noise = 1.0, 0.5
    model = ModelConfig(
        prior="gaussian",
        channel="linear_gaussian",
        prior_params={"variance": variance},
        channel_params={"noise_variance": noise},
    )
    numerics = replace(cfg.numerics, gamp_tol=1e-12, gamp_max_iters=2000)
    local = replace(cfg, model=model, numerics=numerics, gamma=1.0)
    prior, channel = model.build()
    inst = generate_instance(
        GenConfig(P=32, alpha=2.0, prior="gaussian", channel="linear_gaussian", seed=cfg.seed), prior, channel
    )
    oracle = ridge_solution(inst.X, inst.y, variance, noise)
    fp = se_fixed_point(local, prior, channel, inst.alpha)
    worst = 0.0
    for solver in (SOLVER_NAMES.MAP, SOLVER_NAMES.BAMP, SOLVER_NAMES.OPTIMAL):
        result = run_solver(local, inst, solver, prior, channel, fp)
        worst = max(worst, float(np.max(np.abs(result.s_hat - oracle))))
    return worst


def suite_se_tracking(
    cfg: ExperimentConfig, P: int = 1000, trials: int = 4, steps: int = 5, alpha: float = 2.0
) -> float:
    """Relative gap between mean empirical and predicted ``q_s`` of undamped bAMP, logistic + Laplace."""
    prior, channel = make_laplace_prior(1.0), make_logistic_channel()
    predicted = np.array([s.q_s for s in bamp_se_trajectory(prior, channel, alpha, 1.0, n_steps=steps)])
    measured = np.zeros(steps + 1)
    correctors = make_bamp_correctors(channel, prior)
    for trial in range(trials):
        gc = GenConfig(P=P, alpha=alpha, prior="laplace", channel="logistic", seed=cfg.seed, trial=trial)
        inst = generate_instance(gc, prior, channel)
        _, trajectory, _ = run_gamp(
            inst, correctors, max_iters=steps + 1, tol=0.0, damping=0.0, prior_variance=prior.variance
        )
        states = empirical_state(trajectory, inst.s_true)
        measured += np.array([s.q_s for s in states[: steps + 1]]) / trials
    return float(np.max(np.abs(measured - predicted) / predicted))


def default_suites(cfg: ExperimentConfig) -> list[tuple[str, Callable[[], float], float]]:
    return [
        ("prox_moreau", lambda: suite_prox_moreau(cfg.numerics.xtol), 1e-5),
        ("moreau_inversion", suite_moreau_inversion, 1e-4),
        ("roundtrip", suite_roundtrip, 1e-4),
        ("gaussian_constructions", suite_gaussian_constructions, 1e-6),
        ("gaussian_state_evolution", suite_gaussian_se, 1e-8),
        ("gaussian_solvers", lambda: suite_gaussian_solvers(cfg), 1e-6),
        ("se_tracking", lambda: suite_se_tracking(cfg), 0.1),
    ]


def run_suites(suites) -> list[SuiteResult]:
    results = []
    for name, check, threshold in suites:
        logger.info(f"Selftest suite {name}")
        try:
            result = SuiteResult(name, float(check()), threshold)
        except AmpError as e:
            result = SuiteResult(name, float("nan"), threshold, error=f"{type(e).__name__}: {e}")
        if not result.passed:
            logger.error(f"Selftest suite {name} failed: residual {result.max_residual:.3g} > {threshold:g}")
        results.append(result)
    return results


def cmd_selftest(cfg: ExperimentConfig, out: str, suites=None) -> dict[str, str]:
    """Run every suite, write and print the JSON verdict.

    Raises:
        SelftestFailure: If any suite fails; the report is written first.
    """
    results = run_suites(default_suites(cfg) if suites is None else suites)
    report = {"passed": all(r.passed for r in results), "suites": {r.name: r.as_dict() for r in results}}
    path = save_json(report, out, SELFTEST_FILE)
    print(json.dumps({"passed": report["passed"], "report": path}, sort_keys=True))
    if not report["passed"]:
        failed = [r.name for r in results if not r.passed]
        raise SelftestFailure(f"Selftest failed: {failed}")
    return {"report": path}
