import numpy as np
import pytest

from src.problem.problem_model import (
    GroundTruth,
    ProblemBundle,
    SparseProblem,
    generate_gaussian_instance,
)
from src.utils.exceptions import InvalidArgumentError, InvalidConfigurationError


class TestGenerate:
    def test_shapes_and_sparsity(self):
        bundle = generate_gaussian_instance(n=50, m=20, s=4, sigma=0.01, lam=0.05, seed=1)
        assert bundle.problem.phi.shape == (20, 50)
        assert bundle.problem.y.shape == (20,)
        assert bundle.truth.x_true.shape == (50,)
        assert np.count_nonzero(bundle.truth.x_true) == 4
        assert bundle.truth.s == 4

    def test_columns_have_unit_norm(self):
        bundle = generate_gaussian_instance(n=50, m=20, s=4, seed=2)
        np.testing.assert_allclose(bundle.problem.column_norms(), 1.0, atol=1e-12)

    def test_same_seed_reproduces_bundle(self):
        a = generate_gaussian_instance(n=30, m=10, s=3, seed=9)
        b = generate_gaussian_instance(n=30, m=10, s=3, seed=9)
        assert a.same_data(b)

    def test_different_seed_changes_bundle(self):
        a = generate_gaussian_instance(n=30, m=10, s=3, seed=9)
        b = generate_gaussian_instance(n=30, m=10, s=3, seed=10)
        assert not a.same_data(b)

    def test_noiseless_observation_is_exact(self):
        bundle = generate_gaussian_instance(n=30, m=10, s=3, sigma=0.0, seed=4)
        np.testing.assert_array_equal(bundle.problem.y,
                                      bundle.problem.phi @ bundle.truth.x_true)

    @pytest.mark.parametrize("n, m, s", [(20, 20, 2), (20, 25, 2), (20, 10, 11)])
    def test_rejects_bad_dimensions(self, n, m, s):
        with pytest.raises(InvalidConfigurationError):
            generate_gaussian_instance(n=n, m=m, s=s, seed=0)

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(InvalidArgumentError):
            generate_gaussian_instance(n=20, m=10, s=2, lam=0.0, seed=0)

    def test_default_instance_matches_benchmark_sizes(self, benchmark_bundle):
        problem = benchmark_bundle.problem
        assert (problem.m, problem.n) == (200, 400)
        assert benchmark_bundle.truth.s == 20
        assert problem.lam == 0.05


class TestSparseProblem:
    def test_arrays_are_read_only(self, small_bundle):
        with pytest.raises(ValueError):
            small_bundle.problem.phi[0, 0] = 1.0
        with pytest.raises(ValueError):
            small_bundle.problem.y[0] = 1.0

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(InvalidArgumentError):
            SparseProblem(np.eye(3), np.ones(3), lam=0.0)

    def test_rejects_zero_column(self):
        phi = np.eye(3)
        phi[:, 1] = 0.0
        with pytest.raises(InvalidArgumentError, match="all-zero column"):
            SparseProblem(phi, np.ones(3), lam=0.1)

    def test_rejects_mismatched_observation(self):
        with pytest.raises(InvalidArgumentError):
            SparseProblem(np.eye(3), np.ones(4), lam=0.1)

    def test_rejects_non_finite_data(self):
        with pytest.raises(InvalidArgumentError):
            SparseProblem(np.eye(3), np.array([1.0, np.nan, 0.0]), lam=0.1)

    def test_square_identity_is_allowed(self):
        problem = SparseProblem(np.eye(4), np.ones(4), lam=0.1)
        assert not problem.is_underdetermined

    def test_gram_cache(self, small_bundle):
        problem = small_bundle.problem
        cached = problem.with_gram()
        assert cached.has_gram and not problem.has_gram
        np.testing.assert_allclose(cached.gram, problem.phi.T @ problem.phi)
        np.testing.assert_allclose(cached.phi_t_y, problem.phi.T @ problem.y)
        assert cached.with_gram() is cached
        assert cached.without_gram().same_data(problem)

    def test_gram_alone_fills_in_phi_t_y(self, small_bundle):
        problem = small_bundle.problem
        cached = SparseProblem(problem.phi, problem.y, problem.lam,
                               gram=problem.phi.T @ problem.phi)
        np.testing.assert_allclose(cached.phi_t_y, problem.phi.T @ problem.y)
        assert not cached.phi_t_y.flags.writeable

    def test_phi_t_y_needs_gram(self, small_bundle):
        problem = small_bundle.problem
        with pytest.raises(InvalidArgumentError, match="gram"):
            SparseProblem(problem.phi, problem.y, problem.lam, phi_t_y=problem.phi.T @ problem.y)

    def test_rejects_mismatched_gram(self, small_bundle):
        problem = small_bundle.problem
        with pytest.raises(InvalidArgumentError, match="gram has shape"):
            SparseProblem(problem.phi, problem.y, problem.lam, gram=np.eye(3))


class TestGroundTruth:
    def test_nonzero_count_must_match(self):
        with pytest.raises(InvalidArgumentError):
            GroundTruth(np.array([1.0, 0.0, 2.0]), s=1, sigma=0.0, seed=0)

    def test_bundle_checks_lengths(self):
        truth = GroundTruth(np.array([1.0, 0.0]), s=1, sigma=0.0, seed=0)
        with pytest.raises(InvalidArgumentError):
            ProblemBundle(SparseProblem(np.eye(3), np.ones(3), lam=0.1), truth)

    def test_support(self):
        truth = GroundTruth(np.array([0.0, -1.5, 0.0, 2.0]), s=2, sigma=0.1, seed=3)
        np.testing.assert_array_equal(truth.support, [1, 3])
