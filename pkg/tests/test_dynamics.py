import numpy as np
import pytest

from src.analysis.constants import compute_moduli
from src.problem.problem_model import SparseProblem
from src.solvers.dynamics import (
    CappaDynamics,
    CappaParams,
    FunctionDynamics,
    LcaDynamics,
    LcaParams,
    NominalPdsDynamics,
    build_dynamics,
    cappa_rhs,
    lca_rhs,
    nominal_pds_rhs,
)
from src.solvers.integrator import IntegratorConfig, integrate
from src.solvers.prox_core import kkt_residual, prox_step, soft_threshold
from src.utils.exceptions import InvalidArgumentError

from tests.conftest import random_sparse_vectors


@pytest.fixture
def state(small_bundle):
    return np.random.Generator(np.random.PCG64(4)).standard_normal(small_bundle.problem.n)


@pytest.fixture
def unit_plane():
    """phi = I in two dimensions, y = 0, lambda = 1."""
    return SparseProblem(np.eye(2), np.zeros(2), lam=1.0)


class TestCappaParams:
    @pytest.mark.parametrize("changes", [
        {'alpha1': 0.0}, {'alpha1': 1.0}, {'alpha2': 1.0}, {'alpha2': 0.5},
        {'kappa1': 0.0}, {'kappa2': -1.0}, {'eta': 0.0},
    ])
    def test_rejects_out_of_range(self, changes):
        with pytest.raises(InvalidArgumentError):
            CappaParams(**changes)

    def test_relaxed_params_allow_degenerate_gains(self):
        params = CappaParams(kappa1=1.0, kappa2=0.0, alpha1=1.0, alpha2=1.1, eta=0.4, strict=False)
        assert params.kappa2 == 0.0

    def test_scaled(self):
        params = CappaParams(kappa1=2.0, kappa2=3.0).scaled(1.5)
        assert (params.kappa1, params.kappa2) == (3.0, 4.5)


class TestCappaField:
    def test_vanishes_at_closed_form_minimizer(self, identity_problem):
        x_star = soft_threshold(identity_problem.y, identity_problem.lam)
        rhs = cappa_rhs(identity_problem, CappaParams(eta=1.0), x_star)
        assert np.all(rhs == 0.0)

    def test_identity_example(self, unit_plane):
        params = CappaParams(kappa1=1.0, kappa2=1.0, alpha1=0.5, alpha2=1.5, eta=0.5)
        rhs = cappa_rhs(unit_plane, params, np.array([2.0, 0.0]))
        np.testing.assert_allclose(rhs, [-(1.5 ** 0.5 + 1.5 ** 1.5), 0.0], rtol=1e-12)
        assert rhs[0] == pytest.approx(-3.0618621784789726, rel=1e-12)

    def test_magnitude_and_direction(self, small_bundle, state):
        params = CappaParams(kappa1=3.0, kappa2=5.0, alpha1=0.3, alpha2=1.7, eta=0.4)
        r = state - prox_step(small_bundle.problem, state, params.eta).z
        norm = np.linalg.norm(r)
        rhs = cappa_rhs(small_bundle.problem, params, state)
        expected = 3.0 * norm ** 0.3 + 5.0 * norm ** 1.7
        assert np.linalg.norm(rhs) == pytest.approx(expected, rel=1e-12)
        np.testing.assert_allclose(rhs / np.linalg.norm(rhs), -r / norm, atol=1e-12)

    def test_linear_limit_is_the_nominal_flow(self, small_bundle, state):
        params = CappaParams(kappa1=1.0, kappa2=0.0, alpha1=1.0, alpha2=1.1, eta=0.4, strict=False)
        np.testing.assert_allclose(cappa_rhs(small_bundle.problem, params, state),
                                   nominal_pds_rhs(small_bundle.problem, 0.4, state),
                                   rtol=1e-12, atol=1e-12)

    def test_evaluator_matches_pure_function(self, small_bundle, state):
        params = CappaParams()
        ev = CappaDynamics(small_bundle.problem, params).evaluate(state)
        np.testing.assert_array_equal(ev.derivative,
                                      cappa_rhs(small_bundle.problem, params, state))
        assert ev.residual == pytest.approx(
            prox_step(small_bundle.problem, state, params.eta).fixed_point_residual)

    def test_points_toward_the_minimizer_on_sparse_states(self, sparse_optimum_instance):
        bundle, ref = sparse_optimum_instance
        problem = bundle.problem
        eta = 0.5 * compute_moduli(problem.phi, 1, delta_mode="exact").eta_max
        params = CappaParams(eta=eta)
        checked = 0
        for x in random_sparse_vectors(problem.n, 1, 500, seed=8):
            if np.linalg.norm(x - ref.x_ref) <= 1e-4:
                continue
            assert np.dot(cappa_rhs(problem, params, x), x - ref.x_ref) < 0.0
            checked += 1
        assert checked > 400


class TestNominalPds:
    def test_identity_example(self, unit_plane):
        np.testing.assert_allclose(nominal_pds_rhs(unit_plane, 0.5, np.array([2.0, 0.0])),
                                   [-1.5, 0.0], atol=1e-15)

    def test_is_prox_gap(self, small_bundle, state):
        ev = prox_step(small_bundle.problem, state, 0.4)
        np.testing.assert_array_equal(nominal_pds_rhs(small_bundle.problem, 0.4, state),
                                      ev.z - state)
        flow = NominalPdsDynamics(small_bundle.problem, 0.4).evaluate(state)
        assert flow.residual == ev.fixed_point_residual


class TestLca:
    def test_equilibrium_on_identity(self, identity_problem):
        params = LcaParams.for_problem(identity_problem)
        assert params.threshold == identity_problem.lam
        du, a = lca_rhs(identity_problem, params, identity_problem.y)
        np.testing.assert_allclose(du, 0.0, atol=1e-12)
        np.testing.assert_allclose(a, soft_threshold(identity_problem.y, identity_problem.lam))

    def test_finite_time_rescaling(self, small_bundle, state):
        params = LcaParams(tau=0.5, threshold=0.05, ft_exponent=0.5)
        du, _ = lca_rhs(small_bundle.problem, params, state)
        du_ft, _ = lca_rhs(small_bundle.problem, params, state, finite_time=True)
        norm = np.linalg.norm(du)
        np.testing.assert_allclose(du_ft, du * norm ** -0.5, rtol=1e-12)
        assert np.linalg.norm(du_ft) == pytest.approx(norm ** 0.5, rel=1e-12)

    def test_time_constant_scales_the_derivative(self, small_bundle, state):
        fast, _ = lca_rhs(small_bundle.problem, LcaParams(tau=1.0, threshold=0.05), state)
        slow, _ = lca_rhs(small_bundle.problem, LcaParams(tau=4.0, threshold=0.05), state)
        np.testing.assert_allclose(fast, 4.0 * slow, rtol=1e-12)

    def test_output_is_thresholded_state(self, small_bundle, state):
        dyn = LcaDynamics(small_bundle.problem, LcaParams(threshold=0.3))
        np.testing.assert_array_equal(dyn.output(state), soft_threshold(state, 0.3))
        assert dyn.name == "lca"
        assert LcaDynamics(small_bundle.problem, LcaParams(), finite_time=True).name == "ft_lca"

    def test_initial_state_reproduces_the_start(self, small_bundle, state):
        dyn = LcaDynamics(small_bundle.problem, LcaParams(threshold=0.3))
        x0 = soft_threshold(state, 0.1)
        np.testing.assert_allclose(dyn.output(dyn.initial_state(x0)), x0, atol=1e-15)

    def test_fixed_point_solves_the_lasso(self, small_bundle):
        problem = small_bundle.problem
        dyn = LcaDynamics(problem, LcaParams.for_problem(problem))
        traj = integrate(dyn, np.zeros(problem.n), IntegratorConfig(dt=0.1, t_max=200.0))
        assert kkt_residual(problem, dyn.output(traj.final_state)) <= 1e-6

    def test_finite_time_variant_reaches_the_lasso_solution(self, small_bundle):
        problem = small_bundle.problem
        dyn = LcaDynamics(problem, LcaParams.for_problem(problem), finite_time=True)
        traj = integrate(dyn, np.zeros(problem.n), IntegratorConfig(dt=1e-3, t_max=50.0,
                                                                   record_states=False))
        assert kkt_residual(problem, dyn.output(traj.final_state)) <= 1e-4

    @pytest.mark.parametrize("changes", [{'tau': 0.0}, {'ft_exponent': 1.0},
                                         {'ft_exponent': 0.0}, {'threshold': -1.0}])
    def test_rejects_out_of_range(self, changes):
        with pytest.raises(InvalidArgumentError):
            LcaParams(**changes)


class TestBuildDynamics:
    @pytest.mark.parametrize("name, cls", [("cappa", CappaDynamics), ("pds", NominalPdsDynamics),
                                           ("lca", LcaDynamics), ("ft_lca", LcaDynamics)])
    def test_known_names(self, small_bundle, name, cls):
        dyn = build_dynamics(name, small_bundle.problem)
        assert isinstance(dyn, cls)
        assert dyn.name == name

    def test_unknown_name(self, small_bundle):
        with pytest.raises(InvalidArgumentError):
            build_dynamics("fista", small_bundle.problem)


def test_function_dynamics_residual_defaults_to_norm():
    dyn = FunctionDynamics(lambda x: -2.0 * x)
    ev = dyn.evaluate(np.array([3.0, 4.0]))
    np.testing.assert_array_equal(ev.derivative, [-6.0, -8.0])
    assert ev.residual == 10.0


def test_flows_agree_on_problems_with_cached_gram(small_bundle, state):
    cached = SparseProblem(small_bundle.problem.phi, small_bundle.problem.y, 0.05).with_gram()
    np.testing.assert_allclose(cappa_rhs(cached, CappaParams(), state),
                               cappa_rhs(small_bundle.problem, CappaParams(), state),
                               rtol=1e-10, atol=1e-12)
