import numpy as np
import pytest

from chenflow.chen import chen_init, chen_step, evaluate, regressor
from chenflow.learner import (
    LearnerConfig,
    batch_least_squares,
    learn_step,
    learner_init,
    rls_update,
)
from chenflow.words import Alphabet, order_vector


def run_rls(config, phis, ys):
    state = learner_init(config, phis.shape[1])
    for phi, y in zip(phis, ys):
        state = rls_update(state, phi, y)
    return state


class TestInit:
    def test_defaults(self):
        ov = order_vector(Alphabet(1), 3)
        state = learner_init(LearnerConfig(), ov)
        np.testing.assert_array_equal(state.theta, np.zeros(15))
        np.testing.assert_array_equal(state.P, np.eye(15))
        assert state.n == 0

    def test_custom_theta0(self):
        theta0 = np.arange(4.0)
        state = learner_init(LearnerConfig(theta0=theta0), 4)
        np.testing.assert_array_equal(state.theta, theta0)

    def test_rejects_indefinite_P0(self):
        P0 = np.diag([1.0, -0.5])
        with pytest.raises(ValueError):
            learner_init(LearnerConfig(P0=P0), 2)

    def test_rejects_asymmetric_P0(self):
        P0 = np.array([[1.0, 0.3], [0.0, 1.0]])
        with pytest.raises(ValueError):
            learner_init(LearnerConfig(P0=P0), 2)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            learner_init(LearnerConfig(theta0=np.zeros(3)), 4)
        with pytest.raises(ValueError):
            learner_init(LearnerConfig(P0=np.eye(3)), 4)


class TestUpdate:
    def test_hand_worked_single_update(self):
        # from zero estimate and unit covariance, phi = e1 and y = 1
        # move the first coefficient to 1/2
        state = learner_init(LearnerConfig(reset_period=0), 4)
        phi = np.array([1.0, 0, 0, 0])
        new = rls_update(state, phi, 1.0)
        np.testing.assert_allclose(new.theta, [0.5, 0, 0, 0], atol=1e-15)
        assert new.n == 1

    def test_zero_innovation_leaves_theta(self):
        rng = np.random.default_rng(2)
        state = learner_init(LearnerConfig(reset_period=0), 5)
        state = rls_update(state, rng.normal(size=5), 0.7)
        phi = rng.normal(size=5)
        y = float(phi @ state.theta)
        new = rls_update(state, phi, y)
        np.testing.assert_array_equal(new.theta, state.theta)
        assert np.max(np.abs(new.P - state.P)) > 0

    def test_rejects_nonfinite(self):
        state = learner_init(LearnerConfig(), 3)
        with pytest.raises(ValueError):
            rls_update(state, np.array([1.0, np.nan, 0.0]), 1.0)
        with pytest.raises(ValueError):
            rls_update(state, np.ones(3), np.inf)

    def test_symmetry_and_positivity_through_run(self):
        rng = np.random.default_rng(3)
        phis = rng.normal(size=(200, 6))
        ys = rng.normal(size=200)
        state = learner_init(LearnerConfig(reset_period=0), 6)
        for phi, y in zip(phis, ys):
            state = rls_update(state, phi, y)
            assert np.max(np.abs(state.P - state.P.T)) <= 1e-10
            assert np.min(np.linalg.eigvalsh(state.P)) > 0

    def test_information_accumulates_rank_one(self):
        # inverse covariance gains phi phi' at each step
        rng = np.random.default_rng(5)
        state = learner_init(LearnerConfig(reset_period=0), 4)
        for _ in range(30):
            phi = rng.normal(size=4)
            before = np.linalg.inv(state.P)
            state = rls_update(state, phi, rng.normal())
            after = np.linalg.inv(state.P)
            np.testing.assert_allclose(
                after - before, np.outer(phi, phi), rtol=1e-8, atol=1e-8
            )


class TestBatchEquivalence:
    def test_identity_covariance(self):
        rng = np.random.default_rng(7)
        phis = rng.normal(size=(120, 8))
        ys = rng.normal(size=120)
        state = run_rls(LearnerConfig(reset_period=0), phis, ys)
        direct = batch_least_squares(phis, ys)
        np.testing.assert_allclose(state.theta, direct, rtol=1e-8)

    def test_scaled_covariance_and_offset_start(self):
        rng = np.random.default_rng(11)
        phis = rng.normal(size=(150, 5))
        ys = rng.normal(size=150)
        theta0 = rng.normal(size=5)
        P0 = 2.0 * np.eye(5)
        state = run_rls(LearnerConfig(theta0=theta0, P0=P0, reset_period=0), phis, ys)
        # P0 = 2I matches the half-weight regularizer:
        #   (sum phi phi' + I/2) theta = sum phi y + theta0/2
        A = phis.T @ phis + 0.5 * np.eye(5)
        b = phis.T @ ys + 0.5 * theta0
        np.testing.assert_allclose(state.theta, np.linalg.solve(A, b), rtol=1e-8)
        np.testing.assert_allclose(
            state.theta, batch_least_squares(phis, ys, theta0, P0), rtol=1e-8
        )


class TestReset:
    def test_covariance_restored_after_period(self):
        rng = np.random.default_rng(13)
        config = LearnerConfig(reset_period=4)
        state = learner_init(config, 3)
        for i in range(1, 9):
            state = rls_update(state, rng.normal(size=3), rng.normal())
            if i % 4 == 0:
                np.testing.assert_array_equal(state.P, np.eye(3))
                assert state.steps_since_reset == 0
            else:
                assert np.max(np.abs(state.P - np.eye(3))) > 0

    def test_zero_period_never_resets(self):
        rng = np.random.default_rng(17)
        state = learner_init(LearnerConfig(reset_period=0), 3)
        for _ in range(50):
            state = rls_update(state, rng.normal(size=3), rng.normal())
        assert np.max(np.abs(state.P - np.eye(3))) > 0

    def test_theta_not_touched_by_reset(self):
        rng = np.random.default_rng(19)
        phis = rng.normal(size=(4, 3))
        ys = rng.normal(size=4)
        with_reset = run_rls(LearnerConfig(reset_period=4), phis, ys)
        without = run_rls(LearnerConfig(reset_period=0), phis, ys)
        np.testing.assert_array_equal(with_reset.theta, without.theta)


class TestLearnStep:
    def test_true_coefficients_give_zero_innovation(self):
        rng = np.random.default_rng(23)
        alphabet = Alphabet(1)
        ov = order_vector(alphabet, 2)
        theta_true = rng.normal(size=len(ov))
        learner = learner_init(LearnerConfig(theta0=theta_true, reset_period=0), ov)
        chen = chen_init(ov, np.zeros(2))
        for _ in range(20):
            chen = chen_step(chen, rng.uniform(-0.5, 0.5, size=2))
            y = evaluate(theta_true, chen)
            learner, predicted, innovation = learn_step(learner, chen, y)
            assert innovation == pytest.approx(0.0, abs=1e-12)
            assert predicted == pytest.approx(y, rel=1e-12)
        np.testing.assert_allclose(learner.theta, theta_true, atol=1e-10)

    def test_returns_prediction_before_update(self):
        rng = np.random.default_rng(29)
        ov = order_vector(Alphabet(1), 1)
        learner = learner_init(LearnerConfig(reset_period=0), ov)
        chen = chen_step(chen_init(ov, np.zeros(2)), rng.uniform(-1, 1, size=2))
        phi = regressor(chen)
        expected_pred = float(phi @ learner.theta)
        learner2, predicted, innovation = learn_step(learner, chen, 2.0)
        assert predicted == expected_pred
        assert innovation == 2.0 - expected_pred
        assert learner2.n == 1
