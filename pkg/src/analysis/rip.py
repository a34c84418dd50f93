"""
Measurement-matrix properties: spectral norm and restricted isometry constants.

delta_k is the smallest delta with

    (1 - delta) ||x||^2 <= ||phi x||^2 <= (1 + delta) ||x||^2

for every k-sparse x, i.e. the worst deviation from 1 of the extreme
eigenvalues of phi_S^T phi_S over size-k supports S. The exact value is an
enumeration over all supports and only feasible at desk scale; at larger
scale a sampled lower bound is returned and tagged as such.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

import numpy as np

from config.settings import ANALYSIS_SETTINGS
from src.utils.exceptions import CapacityError, InvalidArgumentError
from src.utils.logger import get_logger
from src.utils.validator import require_positive_int
from src.utils.workers import run_tasks

logger = get_logger(__name__)


class DeltaSource(str, Enum):
    EXACT_BRUTEFORCE = "exact_bruteforce"
    SURROGATE_BOUND = "surrogate_bound"


@dataclass(frozen=True)
class SurrogateRip:
    lower_bound: float
    note: DeltaSource = DeltaSource.SURROGATE_BOUND
    samples: int = 0


@dataclass(frozen=True)
class WorstSupport:
    """The support attaining delta_k and the eigen pair that attains it."""

    delta: float
    support: Tuple[int, ...]
    eigenvalue: float
    eigenvector: np.ndarray


def spectral_norm(phi: np.ndarray,
                  tol: float = ANALYSIS_SETTINGS['power_iteration_tol'],
                  max_iter: int = ANALYSIS_SETTINGS['power_iteration_max_iter'],
                  seed: int = 0) -> float:
    """||phi||_2 by power iteration on phi^T phi."""
    phi = np.asarray(phi, dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal(phi.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = phi.T @ (phi @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - estimate) <= tol * norm:
            estimate = norm
            break
        estimate = norm
    return math.sqrt(estimate)


def _check_order(phi: np.ndarray, k: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2:
        raise InvalidArgumentError("phi must be a matrix")
    require_positive_int(k, "order")
    if k > phi.shape[0]:
        raise InvalidArgumentError(f"order k={k} exceeds row count m={phi.shape[0]}")
    if k > phi.shape[1]:
        raise InvalidArgumentError(f"order k={k} exceeds column count n={phi.shape[1]}")
    return phi


def _support_eigenvalues(gram: np.ndarray, supports: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of every Gram sub-block, shape (count, k)."""
    blocks = gram[supports[:, :, None], supports[:, None, :]]
    return np.linalg.eigvalsh(blocks)


def _violation(eigs: np.ndarray) -> np.ndarray:
    return np.maximum(1.0 - eigs[:, 0], eigs[:, -1] - 1.0)


def _chunk_task(args) -> Tuple[float, Tuple[int, ...]]:
    gram, supports = args
    violation = _violation(_support_eigenvalues(gram, supports))
    best = int(np.argmax(violation))
    return float(violation[best]), tuple(int(i) for i in supports[best])


def _support_chunks(n: int, k: int, chunk_size: int) -> Iterator[np.ndarray]:
    combos = itertools.combinations(range(n), k)
    while True:
        chunk = list(itertools.islice(combos, chunk_size))
        if not chunk:
            return
        yield np.asarray(chunk, dtype=np.intp)


def rip_worst_support(phi, order: int,
                      max_supports: int = ANALYSIS_SETTINGS['max_supports'],
                      jobs: int = 1,
                      chunk_size: int = ANALYSIS_SETTINGS['chunk_size']) -> WorstSupport:
    """Exhaustive scan over size-k supports; returns the extremal one."""
    phi = _check_order(phi, order)
    count = math.comb(phi.shape[1], order)
    if count > max_supports:
        raise CapacityError(
            f"{count} supports of size {order} exceed the enumeration guard "
            f"({max_supports}); use the sampled surrogate instead")

    gram = phi.T @ phi
    tasks = ((gram, chunk) for chunk in _support_chunks(phi.shape[1], order, chunk_size))
    results = run_tasks(_chunk_task, tasks, jobs)
    delta, support = max(results, key=lambda item: item[0])

    eigvals, eigvecs = np.linalg.eigh(gram[np.ix_(support, support)])
    if 1.0 - eigvals[0] >= eigvals[-1] - 1.0:
        value, vector = eigvals[0], eigvecs[:, 0]
    else:
        value, vector = eigvals[-1], eigvecs[:, -1]
    logger.debug(f"Exact delta_{order} = {delta:.6g} over {count} supports")
    return WorstSupport(delta=delta, support=support, eigenvalue=float(value),
                        eigenvector=vector)


def rip_constant_bruteforce(phi, order: int,
                            max_supports: int = ANALYSIS_SETTINGS['max_supports'],
                            jobs: int = 1) -> float:
    """Exact delta_k by enumerating every size-k support."""
    return rip_worst_support(phi, order, max_supports, jobs).delta


def rip_constant_surrogate(phi, order: int,
                           samples: int = ANALYSIS_SETTINGS['surrogate_samples'],
                           seed: int = 0,
                           chunk_size: int = ANALYSIS_SETTINGS['chunk_size']) -> SurrogateRip:
    """
    Lower bound on delta_k from randomly sampled supports.

    Supports are drawn one after another from a PCG64 stream, so a run with
    more samples sees a superset of the supports of a run with fewer samples
    under the same seed, and the bound never decreases with the sample count.
    """
    phi = _check_order(phi, order)
    require_positive_int(samples, "samples")
    rng = np.random.Generator(np.random.PCG64(seed))
    gram = phi.T @ phi
    n = phi.shape[1]

    bound = 0.0
    drawn = 0
    while drawn < samples:
        size = min(chunk_size, samples - drawn)
        supports = np.sort(
            np.stack([rng.choice(n, size=order, replace=False) for _ in range(size)]), axis=1)
        violation = _violation(_support_eigenvalues(gram, supports))
        bound = max(bound, float(np.max(violation)))
        drawn += size
    logger.debug(f"Sampled delta_{order} >= {bound:.6g} from {samples} supports")
    return SurrogateRip(lower_bound=max(bound, 0.0), samples=samples)


def rip_constant(phi, order: int, mode: str = ANALYSIS_SETTINGS['delta_mode'],
                 max_supports: int = ANALYSIS_SETTINGS['max_supports'],
                 samples: int = ANALYSIS_SETTINGS['surrogate_samples'],
                 seed: int = 0, jobs: int = 1) -> Tuple[float, DeltaSource]:
    """delta_k with its provenance; mode is 'exact', 'surrogate' or 'auto'."""
    if mode not in ("exact", "surrogate", "auto"):
        raise InvalidArgumentError(f"unknown delta mode '{mode}'")
    phi = _check_order(phi, order)
    feasible = math.comb(phi.shape[1], order) <= max_supports
    if mode == "exact" or (mode == "auto" and feasible):
        return rip_constant_bruteforce(phi, order, max_supports, jobs), DeltaSource.EXACT_BRUTEFORCE
    logger.warning(f"delta_{order} from {samples} sampled supports: constants are not certified")
    return rip_constant_surrogate(phi, order, samples, seed).lower_bound, DeltaSource.SURROGATE_BOUND


def effective_order(phi: np.ndarray, s: int) -> Optional[int]:
    """The RIP order 2s used by the theory, or None when 2s exceeds the matrix."""
    k = 2 * s
    return k if k <= min(phi.shape) else None
