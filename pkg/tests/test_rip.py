import numpy as np
import pytest

from src.analysis.rip import (
    DeltaSource,
    effective_order,
    rip_constant,
    rip_constant_bruteforce,
    rip_constant_surrogate,
    rip_worst_support,
    spectral_norm,
)
from src.utils.exceptions import CapacityError, InvalidArgumentError

from tests.conftest import orthogonal_matrix


def unit_column_gaussian(m, n, seed):
    phi = np.random.Generator(np.random.PCG64(seed)).standard_normal((m, n))
    return phi / np.linalg.norm(phi, axis=0)


def sparse_rows(n, k, count, seed):
    """count random k-sparse vectors as the rows of a matrix."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = np.zeros((count, n))
    cols = np.argsort(rng.random((count, n)), axis=1)[:, :k]
    rows[np.arange(count)[:, None], cols] = rng.standard_normal((count, k))
    return rows


class TestSpectralNorm:
    def test_matches_svd(self):
        phi = unit_column_gaussian(15, 20, 0)
        assert spectral_norm(phi) == pytest.approx(np.linalg.norm(phi, 2), rel=1e-8)

    def test_orthonormal_rows(self):
        assert spectral_norm(orthogonal_matrix(20, 1)[:15]) == pytest.approx(1.0, rel=1e-10)

    def test_zero_matrix(self):
        assert spectral_norm(np.zeros((3, 4))) == 0.0


class TestBruteForce:
    @pytest.mark.parametrize("seed", range(10))
    def test_is_a_valid_and_tight_constant(self, seed):
        phi = unit_column_gaussian(15, 20, seed)
        worst = rip_worst_support(phi, 4)
        delta = worst.delta

        x = sparse_rows(20, 4, 100_000, seed=100 + seed)
        ratio = np.sum((x @ phi.T) ** 2, axis=1) / np.sum(x * x, axis=1)
        assert np.all(ratio >= 1.0 - delta - 1e-10)
        assert np.all(ratio <= 1.0 + delta + 1e-10)

        v = np.zeros(20)
        v[list(worst.support)] = worst.eigenvector
        attained = abs(np.sum((phi @ v) ** 2) / np.sum(v * v) - 1.0)
        assert attained >= delta - 1e-6

    def test_orthonormal_columns_give_zero(self):
        phi = orthogonal_matrix(20, 2)[:, :10]
        assert rip_constant_bruteforce(phi, 3) <= 1e-12

    def test_duplicated_column_gives_one(self):
        phi = np.array([[1.0, 1.0], [0.0, 0.0]])
        assert rip_constant_bruteforce(phi, 2) == pytest.approx(1.0, abs=1e-12)

    def test_order_one_is_column_norm_deviation(self):
        phi = np.diag([1.0, 0.5, 1.25])
        assert rip_constant_bruteforce(phi, 1) == pytest.approx(0.75)

    def test_nondecreasing_in_order(self):
        phi = unit_column_gaussian(10, 14, 3)
        deltas = [rip_constant_bruteforce(phi, k) for k in range(1, 5)]
        assert all(b >= a - 1e-12 for a, b in zip(deltas, deltas[1:]))

    def test_guard_raises_capacity_error(self):
        with pytest.raises(CapacityError):
            rip_constant_bruteforce(unit_column_gaussian(15, 20, 0), 4, max_supports=100)

    def test_parallel_scan_agrees(self):
        phi = unit_column_gaussian(12, 16, 4)
        parallel = rip_worst_support(phi, 3, jobs=2, chunk_size=64)
        assert parallel.delta == pytest.approx(rip_worst_support(phi, 3).delta, rel=1e-12)

    @pytest.mark.parametrize("order", [0, 16, 30])
    def test_order_out_of_range(self, order):
        with pytest.raises(InvalidArgumentError):
            rip_constant_bruteforce(unit_column_gaussian(15, 20, 0), order)


class TestSurrogate:
    @pytest.mark.parametrize("seed", range(10))
    def test_never_exceeds_exact_value(self, seed):
        phi = unit_column_gaussian(15, 20, seed)
        surrogate = rip_constant_surrogate(phi, 4, samples=500, seed=seed)
        assert surrogate.lower_bound <= rip_constant_bruteforce(phi, 4) + 1e-12
        assert surrogate.note is DeltaSource.SURROGATE_BOUND
        assert surrogate.samples == 500

    def test_monotone_in_sample_count(self):
        phi = unit_column_gaussian(30, 60, 5)
        bounds = [rip_constant_surrogate(phi, 6, samples=k, seed=3, chunk_size=50).lower_bound
                  for k in (10, 100, 1000)]
        assert all(b >= a - 1e-12 for a, b in zip(bounds, bounds[1:]))

    def test_orthonormal_columns(self):
        phi = orthogonal_matrix(20, 2)[:, :10]
        assert rip_constant_surrogate(phi, 3, samples=200).lower_bound <= 1e-12


class TestRipConstant:
    def test_auto_uses_enumeration_when_feasible(self):
        delta, source = rip_constant(unit_column_gaussian(10, 12, 0), 2)
        assert source is DeltaSource.EXACT_BRUTEFORCE
        assert delta == rip_constant_bruteforce(unit_column_gaussian(10, 12, 0), 2)

    def test_auto_falls_back_to_sampling(self):
        phi = unit_column_gaussian(15, 20, 0)
        _, source = rip_constant(phi, 4, max_supports=10, samples=50)
        assert source is DeltaSource.SURROGATE_BOUND

    def test_exact_mode_honours_the_guard(self):
        with pytest.raises(CapacityError):
            rip_constant(unit_column_gaussian(15, 20, 0), 4, mode="exact", max_supports=10)

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgumentError):
            rip_constant(unit_column_gaussian(5, 6, 0), 2, mode="guess")


def test_effective_order():
    phi = np.ones((6, 10))
    assert effective_order(phi, 3) == 6
    assert effective_order(phi, 4) is None
