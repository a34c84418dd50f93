"""
Sparse recovery problem instances.

A SparseProblem is the data of

    minimize  0.5 * ||y - phi @ x||^2 + lam * ||x||_1

and a ProblemBundle pairs it with the ground truth it was synthesized from.
All arrays are stored read-only so instances can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config.settings import PROBLEM_SETTINGS
from src.utils.exceptions import InvalidArgumentError, InvalidConfigurationError
from src.utils.logger import get_logger
from src.utils.validator import (
    require_nonnegative,
    require_positive,
    require_positive_int,
    require_seed,
)

logger = get_logger(__name__)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SparseProblem:
    """Measurement matrix, observation and l1 weight."""

    phi: np.ndarray
    y: np.ndarray
    lam: float
    gram: Optional[np.ndarray] = field(default=None, repr=False)
    phi_t_y: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if phi.ndim != 2:
            raise InvalidArgumentError(f"phi must be a matrix, got shape {phi.shape}")
        if y.shape != (phi.shape[0],):
            raise InvalidArgumentError(
                f"y has shape {y.shape}, expected ({phi.shape[0]},)")
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")
        if np.any(~np.any(phi != 0.0, axis=0)):
            raise InvalidArgumentError("phi has an all-zero column")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(y))):
            raise InvalidArgumentError("phi and y must be finite")

        object.__setattr__(self, 'phi', _frozen(phi))
        object.__setattr__(self, 'y', _frozen(y))
        object.__setattr__(self, 'lam', float(self.lam))
        if self.gram is None:
            if self.phi_t_y is not None:
                raise InvalidArgumentError("phi_t_y is only cached together with gram")
            return
        n = phi.shape[1]
        gram = np.asarray(self.gram, dtype=np.float64)
        if gram.shape != (n, n):
            raise InvalidArgumentError(f"gram has shape {gram.shape}, expected ({n}, {n})")
        if self.phi_t_y is None:
            phi_t_y = phi.T @ y
        else:
            phi_t_y = np.asarray(self.phi_t_y, dtype=np.float64)
        if phi_t_y.shape != (n,):
            raise InvalidArgumentError(f"phi_t_y has shape {phi_t_y.shape}, expected ({n},)")
        object.__setattr__(self, 'gram', _frozen(gram))
        object.__setattr__(self, 'phi_t_y', _frozen(phi_t_y))

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]

    @property
    def is_underdetermined(self) -> bool:
        return self.m < self.n

    @property
    def has_gram(self) -> bool:
        return self.gram is not None

    def with_gram(self) -> "SparseProblem":
        """Return the same problem with phi^T phi and phi^T y cached."""
        if self.has_gram:
            return self
        return SparseProblem(self.phi, self.y, self.lam,
                             gram=self.phi.T @ self.phi, phi_t_y=self.phi.T @ self.y)

    def without_gram(self) -> "SparseProblem":
        if not self.has_gram:
            return self
        return SparseProblem(self.phi, self.y, self.lam)

    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.phi, axis=0)

    def same_data(self, other: "SparseProblem") -> bool:
        """Bitwise equality of phi, y and lambda."""
        return (self.phi.shape == other.phi.shape
                and np.array_equal(self.phi, other.phi)
                and np.array_equal(self.y, other.y)
                and self.lam == other.lam)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """The sparse signal an instance was synthesized from."""

    x_true: np.ndarray
    s: int
    sigma: float
    seed: int

    def __post_init__(self):
        x = np.asarray(self.x_true, dtype=np.float64)
        if x.ndim != 1:
            raise InvalidArgumentError("x_true must be a vector")
        require_positive_int(self.s, "s")
        require_nonnegative(self.sigma, "sigma")
        require_seed(self.seed)
        if self.s > x.shape[0]:
            raise InvalidArgumentError(f"s={self.s} exceeds signal length {x.shape[0]}")
        nonzeros = int(np.count_nonzero(x))
        if nonzeros != self.s:
            raise InvalidArgumentError(f"x_true has {nonzeros} nonzeros, expected s={self.s}")
        object.__setattr__(self, 'x_true', _frozen(x))
        object.__setattr__(self, 's', int(self.s))
        object.__setattr__(self, 'sigma', float(self.sigma))
        object.__setattr__(self, 'seed', int(self.seed))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x_true)

    def same_data(self, other: "GroundTruth") -> bool:
        return (np.array_equal(self.x_true, other.x_true) and self.s == other.s
                and self.sigma == other.sigma and self.seed == other.seed)


@dataclass(frozen=True, eq=False)
class ProblemBundle:
    """A problem with its optional ground truth."""

    problem: SparseProblem
    truth: Optional[GroundTruth] = None

    def __post_init__(self):
        if self.truth is not None and self.truth.x_true.shape[0] != self.problem.n:
            raise InvalidArgumentError(
                f"x_true has length {self.truth.x_true.shape[0]}, "
                f"problem has n={self.problem.n}")

    def same_data(self, other: "ProblemBundle") -> bool:
        if not self.problem.same_data(other.problem):
            return False
        if self.truth is None or other.truth is None:
            return self.truth is None and other.truth is None
        return self.truth.same_data(other.truth)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the algorithm is published so streams can be matched."""
    return np.random.Generator(np.random.PCG64(require_seed(seed)))


def generate_gaussian_instance(n: int = PROBLEM_SETTINGS['n'],
                               m: int = PROBLEM_SETTINGS['m'],
                               s: int = PROBLEM_SETTINGS['s'],
                               sigma: float = PROBLEM_SETTINGS['sigma'],
                               lam: float = PROBLEM_SETTINGS['lambda'],
                               seed: int = PROBLEM_SETTINGS['seed']) -> ProblemBundle:
    """
    Draw a synthetic instance.

    phi has i.i.d. standard normal entries with every column rescaled to unit
    norm. x_true carries s i.i.d. standard normal values on a uniformly random
    support, and y = phi @ x_true + sigma * noise. The draw order (phi, support,
    values, noise) is part of the contract: the seed fully determines the bundle.
    """
    for value, name in ((n, "n"), (m, "m"), (s, "s")):
        require_positive_int(value, name)
    require_nonnegative(sigma, "sigma")
    require_positive(lam, "lambda")
    if not (s <= m < n):
        raise InvalidConfigurationError(
            f"dimensions must satisfy s <= m < n, got s={s}, m={m}, n={n}")

    rng = make_rng(seed)
    phi = rng.standard_normal((m, n))
    phi /= np.linalg.norm(phi, axis=0)

    support = np.sort(rng.choice(n, size=s, replace=False))
    values = rng.standard_normal(s)
    # Exact zeros have probability zero; redraw so the support size is exact
    while np.any(values == 0.0):
        values[values == 0.0] = rng.standard_normal(int(np.sum(values == 0.0)))
    x_true = np.zeros(n)
    x_true[support] = values

    noise = rng.standard_normal(m)
    y = phi @ x_true
    if sigma > 0:
        y = y + sigma * noise

    logger.debug(f"Generated instance n={n} m={m} s={s} sigma={sigma} seed={seed}")
    return ProblemBundle(
        problem=SparseProblem(phi, y, lam),
        truth=GroundTruth(x_true, s, sigma, seed),
    )
