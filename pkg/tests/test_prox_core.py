import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from src.problem.problem_model import SparseProblem
from src.solvers.prox_core import grad_f, kkt_residual, prox_step, soft_threshold, support
from src.utils.exceptions import InvalidArgumentError

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 12), elements=finite)
thresholds = st.floats(min_value=0.0, max_value=10.0)


class TestSoftThreshold:
    def test_examples(self):
        np.testing.assert_array_equal(
            soft_threshold(np.array([3.0, -3.0, 0.5, -0.5, 0.0]), 1.0),
            [2.0, -2.0, 0.0, 0.0, 0.0])

    def test_zero_threshold_is_identity(self):
        v = np.array([1.5, -2.0, 0.0])
        np.testing.assert_array_equal(soft_threshold(v, 0.0), v)

    def test_negative_threshold_rejected(self):
        with pytest.raises(InvalidArgumentError):
            soft_threshold(np.ones(3), -0.1)

    @given(vectors, thresholds)
    def test_shrinks_without_flipping_sign(self, v, tau):
        out = soft_threshold(v, tau)
        assert np.all(np.abs(out) <= np.abs(v))
        assert np.all(out * v >= 0.0)

    @given(vectors, thresholds)
    def test_small_entries_vanish(self, v, tau):
        out = soft_threshold(v, tau)
        assert np.all(out[np.abs(v) <= tau] == 0.0)

    @settings(max_examples=50)
    @given(st.integers(1, 12).flatmap(
        lambda n: st.tuples(arrays(np.float64, n, elements=finite),
                            arrays(np.float64, n, elements=finite))),
        thresholds)
    def test_nonexpansive(self, pair, tau):
        a, b = pair
        gap = np.linalg.norm(soft_threshold(a, tau) - soft_threshold(b, tau))
        assert gap <= np.linalg.norm(a - b) * (1 + 1e-12) + 1e-9


class TestGradient:
    def test_matches_central_differences(self):
        rng = np.random.Generator(np.random.PCG64(0))
        h = 1e-6
        for _ in range(100):
            m, n = rng.integers(2, 8), rng.integers(2, 8)
            phi = rng.standard_normal((m, n)) + 0.1
            problem = SparseProblem(phi, rng.standard_normal(m), lam=0.1)
            x = rng.standard_normal(n)

            def f(v):
                r = problem.y - problem.phi @ v
                return 0.5 * float(r @ r)

            numeric = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(n)])
            exact = grad_f(problem, x)
            assert np.linalg.norm(numeric - exact) <= 1e-6 * max(1.0, np.linalg.norm(exact))

    def test_gram_path_agrees(self, small_bundle):
        x = np.linspace(-1.0, 1.0, small_bundle.problem.n)
        np.testing.assert_allclose(grad_f(small_bundle.problem.with_gram(), x),
                                   grad_f(small_bundle.problem, x), rtol=1e-12, atol=1e-12)

    def test_wrong_length_rejected(self, small_bundle):
        with pytest.raises(InvalidArgumentError):
            grad_f(small_bundle.problem, np.zeros(3))


class TestFixedPoint:
    def test_closed_form_minimizer_is_fixed(self, identity_problem):
        x_star = soft_threshold(identity_problem.y, identity_problem.lam)
        for eta in (0.1, 0.5, 1.0, 1.9):
            ev = prox_step(identity_problem, x_star, eta)
            assert ev.fixed_point_residual <= 1e-12
            np.testing.assert_allclose(ev.z, x_star, atol=1e-12)

    def test_kkt_vanishes_at_minimizer(self, identity_problem):
        x_star = soft_threshold(identity_problem.y, identity_problem.lam)
        assert kkt_residual(identity_problem, x_star) <= 1e-12

    def test_both_residuals_positive_away_from_minimizer(self, identity_problem):
        x = soft_threshold(identity_problem.y, identity_problem.lam) + 0.25
        assert prox_step(identity_problem, x, 0.5).fixed_point_residual > 1e-3
        assert kkt_residual(identity_problem, x) > 1e-3

    def test_zero_is_optimal_for_large_lambda(self, small_bundle):
        p = small_bundle.problem
        lam = 1.01 * float(np.max(np.abs(p.phi.T @ p.y)))
        big = SparseProblem(p.phi, p.y, lam)
        assert kkt_residual(big, np.zeros(p.n)) == 0.0
        assert prox_step(big, np.zeros(p.n), 0.4).fixed_point_residual == 0.0

    def test_nonpositive_eta_rejected(self, identity_problem):
        with pytest.raises(InvalidArgumentError):
            prox_step(identity_problem, np.zeros(8), 0.0)


def scalar_l1_minimizer(v, tau):
    """argmin_u 0.5 * (u - v)^2 + tau * |u| among the kink and the two smooth stationary points."""
    candidates = np.array([0.0, v - tau, v + tau])
    values = 0.5 * (candidates - v) ** 2 + tau * np.abs(candidates)
    return candidates[np.argmin(values)]


class TestProxStep:
    def test_identity_example(self):
        problem = SparseProblem(np.eye(2), np.zeros(2), lam=1.0)
        ev = prox_step(problem, np.array([2.0, 0.0]), 0.5)
        np.testing.assert_allclose(ev.z, [0.5, 0.0], atol=1e-15)
        assert ev.fixed_point_residual == pytest.approx(1.5)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_coordinatewise_minimization(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        problem = SparseProblem(rng.standard_normal((6, 9)), rng.standard_normal(6), lam=0.3)
        x, eta = rng.standard_normal(9), 0.2
        v = x - eta * grad_f(problem, x)
        expected = [scalar_l1_minimizer(vi, eta * problem.lam) for vi in v]
        np.testing.assert_allclose(prox_step(problem, x, eta).z, expected, atol=1e-8)


def test_support():
    np.testing.assert_array_equal(support(np.array([0.0, 1e-9, -0.5, 2.0]), 1e-8), [2, 3])
    assert support(np.zeros(4)).size == 0
