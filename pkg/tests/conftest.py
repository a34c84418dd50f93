"""
Shared fixtures: small instances with known structure, the full-size
benchmark instance and experiment configurations sized for the quick loop.
"""

import numpy as np
import pytest

from config.experiment_config import (
    CappaConfig,
    ExperimentConfig,
    InstanceConfig,
    IntegratorSection,
)
from src.problem.problem_model import (
    GroundTruth,
    ProblemBundle,
    SparseProblem,
    generate_gaussian_instance,
)
from src.solvers.prox_core import support
from src.solvers.reference_solver import fista_solve


def orthogonal_matrix(size, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    return q * np.sign(np.diag(r))


def sparse_vector(n, s, rng, low=0.5):
    """s nonzeros with magnitudes in [low, low + 1] on a random support."""
    x = np.zeros(n)
    idx = rng.choice(n, size=s, replace=False)
    x[idx] = rng.choice([-1.0, 1.0], size=s) * (low + rng.random(s))
    return x


def random_sparse_vectors(n, s, count, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    return [sparse_vector(n, s, rng, low=0.0) for _ in range(count)]


def _solved(bundle, s):
    ref = fista_solve(bundle.problem, tol=1e-12, max_iter=200_000)
    if not ref.converged or len(support(ref.x_ref)) > s:
        return None
    return bundle, ref


@pytest.fixture
def small_bundle():
    """15 x 20 Gaussian instance with a 2-sparse signal."""
    return generate_gaussian_instance(n=20, m=15, s=2, sigma=0.0, lam=0.05, seed=3)


@pytest.fixture
def identity_problem():
    """phi = I, where the minimizer is soft_threshold(y, lam)."""
    rng = np.random.Generator(np.random.PCG64(11))
    return SparseProblem(np.eye(8), rng.standard_normal(8), lam=0.3)


@pytest.fixture(scope="session")
def sparse_optimum_instance():
    """
    Unit-column Gaussian 15 x 20 instance with s = 1, noiseless, and its
    FISTA reference. delta_2 is the column coherence, below 1, and the
    reference is 1-sparse.
    """
    for seed in range(100):
        bundle = generate_gaussian_instance(n=20, m=15, s=1, sigma=0.0, lam=0.05, seed=seed)
        if np.max(np.abs(bundle.truth.x_true)) < 0.2:
            continue
        found = _solved(bundle, 1)
        if found is not None:
            return found
    pytest.skip("no 1-sparse reference among the scanned seeds")


@pytest.fixture(scope="session")
def tight_frame_instance():
    """
    15 x 20 matrix with orthonormal rows (||phi|| = 1) and a 2-sparse signal,
    for which delta_4 < 1. Seeds are scanned until the reference is 2-sparse.
    """
    for seed in range(100):
        phi = orthogonal_matrix(20, seed)[:15]
        rng = np.random.Generator(np.random.PCG64(1000 + seed))
        x_true = sparse_vector(20, 2, rng)
        bundle = ProblemBundle(SparseProblem(phi, phi @ x_true, lam=0.05),
                               GroundTruth(x_true, 2, 0.0, seed))
        found = _solved(bundle, 2)
        if found is not None:
            return found
    pytest.skip("no 2-sparse reference among the scanned seeds")


@pytest.fixture(scope="session")
def orthonormal_instance():
    """12 x 12 orthogonal phi: delta_k = 0 and the reference is exact."""
    phi = orthogonal_matrix(12, 5)
    rng = np.random.Generator(np.random.PCG64(6))
    x_true = sparse_vector(12, 2, rng, low=1.0)
    problem = SparseProblem(phi, phi @ x_true, lam=0.05)
    return ProblemBundle(problem, GroundTruth(x_true, 2, 0.0, 6)), fista_solve(problem)


@pytest.fixture(scope="session")
def benchmark_bundle():
    """The default 200 x 400 instance (s = 20, sigma = 0.016, lambda = 0.05, seed 7)."""
    return generate_gaussian_instance()


@pytest.fixture(scope="session")
def benchmark_reference(benchmark_bundle):
    return fista_solve(benchmark_bundle.problem, tol=1e-10)


@pytest.fixture
def quick_config(tmp_path):
    """A 20 x 40 experiment that runs in about a second."""
    return ExperimentConfig(
        instance=InstanceConfig(n=40, m=20, s=3, sigma=0.01, lam=0.05, seed=5),
        solvers=('cappa', 'pds', 'lca', 'ft_lca'),
        cappa=CappaConfig(alpha1=0.9),
        integrator=IntegratorSection(dt=1e-3, t_max=0.2),
        init_conditions=((1, 0.0), (2, 1.0), (3, 10.0)),
        trials=2,
        size_trials=2,
        dt_sweep=(1e-2, 5e-3),
        nm_sweep=((40, 20), (60, 30)),
        reference_tol=1e-10,
        delta_mode='surrogate',
        surrogate_samples=200,
        output_dir=str(tmp_path / "results"),
        svg=False,
    )


@pytest.fixture
def write_config(tmp_path):
    """Write INI text to a file and return its path."""
    def _write(text, name="experiment.ini"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
