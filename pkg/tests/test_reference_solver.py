import math

import numpy as np
import pytest

from src.problem.problem_model import SparseProblem
from src.solvers.prox_core import kkt_residual, prox_step, soft_threshold, support
from src.solvers.reference_solver import fista_solve, ista_solve, objective
from src.utils.exceptions import InvalidArgumentError


class TestObjective:
    def test_at_zero(self, small_bundle):
        p = small_bundle.problem
        assert objective(p, np.zeros(p.n)) == pytest.approx(0.5 * float(p.y @ p.y), rel=1e-14)

    def test_at_noiseless_truth(self, small_bundle):
        p, x = small_bundle.problem, small_bundle.truth.x_true
        assert objective(p, x) == pytest.approx(p.lam * np.sum(np.abs(x)), rel=1e-12)

    def test_matches_compensated_sum(self, small_bundle):
        p = small_bundle.problem
        x = np.linspace(-1.0, 1.0, p.n)
        r = p.y - p.phi @ x
        exact = 0.5 * math.fsum(v * v for v in r) + p.lam * math.fsum(abs(v) for v in x)
        assert objective(p, x) == pytest.approx(exact, rel=1e-12)


class TestFista:
    def test_identity_closed_form(self, identity_problem):
        solution = fista_solve(identity_problem)
        assert solution.converged
        assert solution.iterations <= 10
        np.testing.assert_allclose(solution.x_ref,
                                   soft_threshold(identity_problem.y, identity_problem.lam),
                                   atol=1e-12)

    def test_converges_on_small_instance(self, small_bundle):
        p = small_bundle.problem
        solution = fista_solve(p, tol=1e-12)
        assert solution.converged
        assert solution.kkt_residual <= 1e-12
        assert kkt_residual(p, solution.x_ref) == solution.kkt_residual
        assert prox_step(p, solution.x_ref, 0.4).fixed_point_residual <= 1e-10

    def test_objective_history_never_increases(self, small_bundle):
        history = fista_solve(small_bundle.problem, tol=1e-12).objective_history
        steps = np.diff(history)
        assert np.all(steps <= 8 * np.finfo(float).eps * np.maximum(np.abs(history[:-1]), 1.0))

    def test_local_optimality(self, small_bundle):
        p = small_bundle.problem
        x_ref = fista_solve(p, tol=1e-12).x_ref
        best = objective(p, x_ref)
        rng = np.random.Generator(np.random.PCG64(12))
        for _ in range(10_000):
            delta = rng.standard_normal(p.n)
            delta *= rng.random() * 1e-2 / np.linalg.norm(delta)
            assert best <= objective(p, x_ref + delta) + 1e-12

    def test_beats_the_true_signal(self, small_bundle):
        p = small_bundle.problem
        solution = fista_solve(p, tol=1e-12)
        assert solution.objective <= objective(p, small_bundle.truth.x_true) + 1e-12

    def test_max_iter_is_reported_not_raised(self, small_bundle):
        solution = fista_solve(small_bundle.problem, tol=1e-14, max_iter=3)
        assert not solution.converged
        assert solution.iterations == 3
        assert solution.kkt_residual > 1e-14

    def test_warm_start(self, small_bundle):
        p = small_bundle.problem
        cold = fista_solve(p, tol=1e-12)
        warm = fista_solve(p, tol=1e-12, x0=cold.x_ref)
        assert warm.iterations == 0
        np.testing.assert_array_equal(warm.x_ref, cold.x_ref)

    def test_large_lambda_gives_zero(self, small_bundle):
        p = small_bundle.problem
        lam = 2.0 * float(np.max(np.abs(p.phi.T @ p.y)))
        solution = fista_solve(SparseProblem(p.phi, p.y, lam))
        assert solution.converged
        assert support(solution.x_ref).size == 0

    @pytest.mark.parametrize("kwargs", [{'tol': 0.0}, {'max_iter': 0}])
    def test_rejects_bad_arguments(self, small_bundle, kwargs):
        with pytest.raises(InvalidArgumentError):
            fista_solve(small_bundle.problem, **kwargs)


class TestIsta:
    def test_reaches_the_fista_optimum(self, small_bundle):
        p = small_bundle.problem
        fista = fista_solve(p, tol=1e-12)
        ista = ista_solve(p, tol=1e-11)
        assert ista.converged
        np.testing.assert_allclose(ista.x_ref, fista.x_ref, atol=1e-8)
        assert np.all(np.diff(ista.objective_history) <= 1e-12)
        assert ista.restarts == 0


@pytest.mark.slow
def test_benchmark_reference(benchmark_bundle, benchmark_reference):
    p = benchmark_bundle.problem
    assert benchmark_reference.converged
    assert benchmark_reference.kkt_residual <= 1e-10
    assert prox_step(p, benchmark_reference.x_ref, 0.4).fixed_point_residual <= 1e-8
    assert benchmark_reference.objective <= objective(p, benchmark_bundle.truth.x_true)
