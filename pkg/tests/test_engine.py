"""The gAMP iteration, its state objects and convergence to the ridge solution on the Gaussian pair."""

import numpy as np
import pytest

from optimal_amp.errors import ContractViolation, DivergenceError
from optimal_amp.estimators.families import quadratic_loss_family
from optimal_amp.gamp.correctors import make_bamp_correctors, make_mamp_correctors
from optimal_amp.gamp.engine import gamp_step, run_gamp
from optimal_amp.gamp.state import CorrectorPair, GampState, GampSummary, ProblemInstance
from optimal_amp.harness.selftest import ridge_solution
from optimal_amp.scalar.functions import quadratic

PRIOR_VARIANCE = 1.0
NOISE_VARIANCE = 0.5

# -----------------------------------------------------------------------
# State objects
# -----------------------------------------------------------------------


class TestProblemInstance:
    def test_shapes_and_ratio(self, gaussian_instance):
        assert (gaussian_instance.N, gaussian_instance.P) == (200, 100)
        assert gaussian_instance.alpha == pytest.approx(2.0)
        np.testing.assert_allclose(gaussian_instance.z_true(), gaussian_instance.X @ gaussian_instance.s_true)

    def test_row_norms_close_to_gamma(self, gaussian_instance):
        assert gaussian_instance.row_norm_statistic() == pytest.approx(1.0, rel=0.05)

    def test_shape_mismatch(self):
        with pytest.raises(ContractViolation):
            ProblemInstance(X=np.zeros((3, 2)), y=np.zeros(2), gamma=1.0)
        with pytest.raises(ContractViolation):
            ProblemInstance(X=np.zeros((3, 2)), y=np.zeros(3), gamma=1.0, s_true=np.zeros(3))
        with pytest.raises(ContractViolation):
            ProblemInstance(X=np.zeros((3, 2)), y=np.zeros(3), gamma=0.0)

    def test_no_signal(self):
        assert ProblemInstance(X=np.eye(2), y=np.zeros(2), gamma=1.0).z_true() is None


class TestGampState:
    def test_initial(self, gaussian_instance):
        state = GampState.initial(gaussian_instance, 1.0)
        assert state.iteration == 0
        assert np.isnan(state.lambda_h)
        np.testing.assert_array_equal(state.s_hat, np.zeros(100))
        assert state.is_finite()

    def test_initial_needs_positive_smoothing(self, gaussian_instance):
        with pytest.raises(ContractViolation):
            GampState.initial(gaussian_instance, 0.0)

    def test_summary_row(self):
        row = GampSummary(t=3, lambda_eta=1.0, lambda_h=0.5, delta=1e-3).as_row()
        assert list(row) == ["t", "q_s", "q_eta", "lambda_eta", "lambda_h", "delta"]
        assert np.isnan(row["q_s"])


# -----------------------------------------------------------------------
# Iteration
# -----------------------------------------------------------------------


def _gaussian_bamp(gaussian_prior, gaussian_channel):
    return make_bamp_correctors(gaussian_channel, gaussian_prior)


class TestGampStep:
    def test_first_step_has_no_memory_term(self, gaussian_instance, gaussian_prior, gaussian_channel):
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        state = GampState.initial(gaussian_instance, 1.0)
        new = gamp_step(state, gaussian_instance, c)
        np.testing.assert_array_equal(new.eta, np.zeros(gaussian_instance.N))
        assert new.iteration == 1
        assert new.lambda_eta_prev == 1.0
        # dG_y is constant on the Gaussian channel
        expected_lambda_h = (NOISE_VARIANCE + 1.0) / gaussian_instance.alpha
        assert new.lambda_h == pytest.approx(expected_lambda_h, rel=1e-12)
        expected_lambda_eta = expected_lambda_h * PRIOR_VARIANCE / (PRIOR_VARIANCE + expected_lambda_h)
        assert new.lambda_eta == pytest.approx(expected_lambda_eta, rel=1e-12)

    def test_smoothing_is_clamped(self, gaussian_instance, gaussian_prior, gaussian_channel):
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        state = GampState.initial(gaussian_instance, 1.0)
        new = gamp_step(state, gaussian_instance, c, lambda_bounds=(1e-3, 0.1))
        assert new.lambda_h == 0.1

    def test_nonfinite_corrector_diverges(self, gaussian_instance):
        def measurement(lam, y, eta):
            return np.full_like(eta, np.nan), np.full_like(eta, np.nan)

        c = CorrectorPair(measurement, lambda lam, h: (h, np.ones_like(h)), kind="bAMP")
        with pytest.raises(DivergenceError) as info:
            gamp_step(GampState.initial(gaussian_instance, 1.0), gaussian_instance, c)
        assert info.value.iteration == 0


class TestRunGamp:
    def test_bamp_reaches_ridge_solution(self, gaussian_instance, gaussian_prior, gaussian_channel):
        inst = gaussian_instance
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        s_hat, _, converged = run_gamp(inst, c, max_iters=2000, tol=1e-12, prior_variance=PRIOR_VARIANCE)
        assert converged
        oracle = ridge_solution(inst.X, inst.y, PRIOR_VARIANCE, NOISE_VARIANCE)
        np.testing.assert_allclose(s_hat, oracle, atol=1e-6)

    def test_map_reaches_ridge_solution(self, gaussian_instance):
        inst = gaussian_instance
        c = make_mamp_correctors(quadratic_loss_family(NOISE_VARIANCE), quadratic(curvature=1.0 / PRIOR_VARIANCE))
        s_hat, _, converged = run_gamp(inst, c, max_iters=2000, tol=1e-12, prior_variance=PRIOR_VARIANCE)
        assert converged
        oracle = ridge_solution(inst.X, inst.y, PRIOR_VARIANCE, NOISE_VARIANCE)
        np.testing.assert_allclose(s_hat, oracle, atol=1e-6)

    def test_trajectory_records(self, gaussian_instance, gaussian_prior, gaussian_channel):
        inst = gaussian_instance
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        _, trajectory, converged = run_gamp(
            inst, c, max_iters=5, tol=0.0, damping=0.0, prior_variance=PRIOR_VARIANCE, keep_iterates=True
        )
        assert not converged
        assert [s.t for s in trajectory] == [0, 1, 2, 3, 4]
        first = trajectory[0]
        assert first.lambda_eta == pytest.approx(inst.gamma * PRIOR_VARIANCE)
        assert first.q_s == pytest.approx(np.mean(inst.s_true**2))
        np.testing.assert_array_equal(first.s_hat, np.zeros(inst.P))
        assert trajectory[-1].q_s < first.q_s

    def test_unmoved_first_step_is_not_convergence(self, gaussian_instance):
        def measurement(lam, y, eta):
            return (eta - y) / (1.0 + lam), np.full_like(eta, 1.0 / (1.0 + lam))

        def signal(lam, h):
            return np.zeros_like(h), np.zeros_like(h)

        c = CorrectorPair(measurement, signal, kind="mAMP")
        _, trajectory, converged = run_gamp(gaussian_instance, c, init=GampState.initial(gaussian_instance, 1.0))
        # s_hat never moves; lambda_h changes once lambda_eta drops to its clamp
        assert converged
        assert [s.t for s in trajectory] == [0, 1, 2]
        assert trajectory[1].lambda_h != trajectory[0].lambda_h

    def test_explicit_initial_state(self, gaussian_instance, gaussian_prior, gaussian_channel):
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        init = GampState.initial(gaussian_instance, 0.5)
        _, trajectory, _ = run_gamp(gaussian_instance, c, init=init, max_iters=1)
        assert trajectory[0].lambda_eta == 0.5

    def test_contracts(self, gaussian_instance, gaussian_prior, gaussian_channel):
        c = _gaussian_bamp(gaussian_prior, gaussian_channel)
        with pytest.raises(ContractViolation):
            run_gamp(gaussian_instance, c)
        with pytest.raises(ContractViolation):
            run_gamp(gaussian_instance, c, prior_variance=1.0, max_iters=0)
        with pytest.raises(ContractViolation):
            run_gamp(gaussian_instance, c, prior_variance=1.0, damping=1.0)
