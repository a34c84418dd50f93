"""
Convergence constants of the proximal flows.

Given the order-2s restricted isometry constant delta of phi:

    mu      = 1 - delta                        strong monotonicity of F on s-sparse pairs
    L       = ||phi|| * sqrt(1 + delta)        Lipschitz modulus of F on s-sparse pairs
    eta_max = 2 mu / L^2                       admissible prox steps are (0, eta_max)
    c_bar   = 1 / (1 + 2 eta mu - eta^2 L^2)
    c       = sqrt(c_bar)                      contraction factor of z(.) toward x*
    eps(c)  = log(c) / log((1 - c) / (1 + c))

The fixed-time settling bound of the CAPPA flow needs alpha1 in
(1 - eps(c), 1). Outside that range the bound is reported unavailable rather
than clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from config.settings import ANALYSIS_SETTINGS, CAPPA_SETTINGS
from src.analysis.rip import DeltaSource, rip_constant, spectral_norm
from src.problem.problem_model import SparseProblem
from src.solvers.prox_core import grad_f, prox_step
from src.utils.exceptions import (
    InvalidArgumentError,
    InvalidConfigurationError,
    NonCertifiedConstantsError,
)
from src.utils.logger import get_logger
from src.utils.validator import (
    as_vector,
    require_open_interval,
    require_positive,
    require_positive_int,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class RipModuli:
    """delta_2s and the gradient moduli it implies."""

    delta_2s: float
    phi_norm: float
    delta_source: DeltaSource = DeltaSource.EXACT_BRUTEFORCE
    order: Optional[int] = None

    @property
    def mu(self) -> float:
        return 1.0 - self.delta_2s

    @property
    def L(self) -> float:
        return self.phi_norm * math.sqrt(1.0 + self.delta_2s)

    @property
    def eta_max(self) -> float:
        return 2.0 * self.mu / self.L ** 2

    @property
    def interval_empty(self) -> bool:
        return not self.eta_max > 0

    @property
    def certified(self) -> bool:
        return self.delta_source is DeltaSource.EXACT_BRUTEFORCE


@dataclass(frozen=True)
class TheoryConstants:
    delta_2s: float
    mu: float
    L: float
    eta_max: float
    eta: float
    c_bar: float
    c: float
    epsilon_c: float
    kappa1: float
    kappa2: float
    alpha1: float
    alpha2: float
    gamma1: float
    gamma2: float
    s1: float
    s2: float
    a1: float
    a2: float
    settle_bound: Optional[float]
    delta_source: DeltaSource

    @property
    def certified(self) -> bool:
        return self.delta_source is DeltaSource.EXACT_BRUTEFORCE

    @property
    def bound_available(self) -> bool:
        return self.settle_bound is not None

    @property
    def alpha1_admissible(self) -> bool:
        return 1.0 - self.epsilon_c < self.alpha1 < 1.0

    @property
    def bound_unavailable_reason(self) -> Optional[str]:
        if self.bound_available:
            return None
        return (f"alpha1={self.alpha1:g} lies outside (1 - eps(c), 1) = "
                f"({1.0 - self.epsilon_c:.6g}, 1), so s1={self.s1:.6g} is not positive")

    def require_certified(self) -> "TheoryConstants":
        if not self.certified:
            raise NonCertifiedConstantsError(
                f"delta_2s={self.delta_2s:.6g} is a sampled lower bound; "
                f"the derived constants are not certified")
        return self

    def as_report(self) -> Dict[str, str]:
        """Flat key/value view, in a fixed key order, for text reports and CSV headers."""
        def fmt(value):
            return repr(float(value))

        report = {
            'delta_2s': fmt(self.delta_2s),
            'delta_source': self.delta_source.value,
            'certified': str(self.certified).lower(),
            'mu': fmt(self.mu),
            'L': fmt(self.L),
            'eta': fmt(self.eta),
            'eta_max': fmt(self.eta_max),
            'c_bar': fmt(self.c_bar),
            'c': fmt(self.c),
            'epsilon_c': fmt(self.epsilon_c),
            'kappa1': fmt(self.kappa1),
            'kappa2': fmt(self.kappa2),
            'alpha1': fmt(self.alpha1),
            'alpha2': fmt(self.alpha2),
            'alpha1_admissible': str(self.alpha1_admissible).lower(),
            'gamma1': fmt(self.gamma1),
            'gamma2': fmt(self.gamma2),
            's1': fmt(self.s1),
            's2': fmt(self.s2),
            'a1': fmt(self.a1),
            'a2': fmt(self.a2),
            'settle_bound': fmt(self.settle_bound) if self.bound_available else 'unavailable',
        }
        return report


# ============================================================================
# ARITHMETIC
# ============================================================================

def contraction_factor(eta: float, mu: float, L: float) -> Tuple[float, float]:
    """(c_bar, c) for a prox step eta inside the admissible interval."""
    c_bar = 1.0 / (1.0 + 2.0 * eta * mu - (eta * L) ** 2)
    return c_bar, math.sqrt(c_bar)


def epsilon_of_c(c: float) -> float:
    require_open_interval(c, 0.0, 1.0, "c")
    return math.log(c) / math.log((1.0 - c) / (1.0 + c))


def check_exponent_condition(c: float, alpha: float) -> bool:
    """True iff ((1 - c) / (1 + c))^(1 - alpha) > c."""
    require_open_interval(c, 0.0, 1.0, "c")
    return ((1.0 - c) / (1.0 + c)) ** (1.0 - alpha) > c


def _power_gain(kappa: float, alpha: float, c: float) -> float:
    ratio = (1.0 - c) / (1.0 + c)
    return kappa / (1.0 - c) ** (1.0 - alpha) * (ratio ** (1.0 - alpha) - c)


def fixed_time_settle_bound(a: float, p: float, b: float, q: float) -> float:
    """Settling-time bound 1/(a(1-p)) + 1/(b(q-1)) for dV/dt <= -a V^p - b V^q."""
    require_positive(a, "a")
    require_positive(b, "b")
    require_open_interval(p, 0.0, 1.0, "p")
    if not q > 1:
        raise InvalidArgumentError(f"q must exceed 1, got {q}")
    return 1.0 / (a * (1.0 - p)) + 1.0 / (b * (q - 1.0))


def constants_from_moduli(moduli: RipModuli, eta: float,
                          kappa1: float = CAPPA_SETTINGS['kappa1'],
                          kappa2: float = CAPPA_SETTINGS['kappa2'],
                          alpha1: float = CAPPA_SETTINGS['alpha1'],
                          alpha2: float = CAPPA_SETTINGS['alpha2']) -> TheoryConstants:
    """Fill every constant from the moduli; pure arithmetic."""
    if moduli.interval_empty:
        raise InvalidConfigurationError(
            f"admissible eta interval is empty: delta_2s={moduli.delta_2s:.6g} >= 1 "
            f"(eta_max={moduli.eta_max:.6g})")
    if not 0 < eta < moduli.eta_max:
        raise InvalidConfigurationError(
            f"eta={eta} outside the admissible interval (0, eta_max={moduli.eta_max:.6g})")
    require_positive(kappa1, "kappa1")
    require_positive(kappa2, "kappa2")
    require_open_interval(alpha1, 0.0, 1.0, "alpha1")
    if not alpha2 > 1:
        raise InvalidArgumentError(f"alpha2 must exceed 1, got {alpha2}")

    c_bar, c = contraction_factor(eta, moduli.mu, moduli.L)
    gamma1 = 0.5 * (1.0 + alpha1)
    gamma2 = 0.5 * (1.0 + alpha2)
    s1 = _power_gain(kappa1, alpha1, c)
    s2 = _power_gain(kappa2, alpha2, c)
    a1 = 2.0 ** gamma1 * s1
    a2 = 2.0 ** gamma2 * s2

    bound = None
    if s1 > 0 and s2 > 0:
        bound = fixed_time_settle_bound(a1, gamma1, a2, gamma2)

    constants = TheoryConstants(
        delta_2s=moduli.delta_2s, mu=moduli.mu, L=moduli.L, eta_max=moduli.eta_max,
        eta=float(eta), c_bar=c_bar, c=c, epsilon_c=epsilon_of_c(c),
        kappa1=float(kappa1), kappa2=float(kappa2),
        alpha1=float(alpha1), alpha2=float(alpha2),
        gamma1=gamma1, gamma2=gamma2, s1=s1, s2=s2, a1=a1, a2=a2,
        settle_bound=bound, delta_source=moduli.delta_source,
    )
    if bound is None:
        logger.warning(f"Settling-time bound unavailable: {constants.bound_unavailable_reason}")
    return constants


# ============================================================================
# FROM A MATRIX
# ============================================================================

def compute_moduli(phi, s: int,
                   delta_mode: str = ANALYSIS_SETTINGS['delta_mode'],
                   max_supports: int = ANALYSIS_SETTINGS['max_supports'],
                   samples: int = ANALYSIS_SETTINGS['surrogate_samples'],
                   seed: int = 0, jobs: int = 1) -> RipModuli:
    """delta_2s (exact or sampled), ||phi|| and their provenance."""
    require_positive_int(s, "s")
    phi = np.asarray(phi, dtype=np.float64)
    delta, source = rip_constant(phi, 2 * s, delta_mode, max_supports, samples, seed, jobs)
    return RipModuli(delta_2s=delta, phi_norm=spectral_norm(phi),
                     delta_source=source, order=2 * s)


def derive_constants(phi, s: int, eta: float,
                     kappa1: float = CAPPA_SETTINGS['kappa1'],
                     kappa2: float = CAPPA_SETTINGS['kappa2'],
                     alpha1: float = CAPPA_SETTINGS['alpha1'],
                     alpha2: float = CAPPA_SETTINGS['alpha2'],
                     delta_mode: str = ANALYSIS_SETTINGS['delta_mode'],
                     max_supports: int = ANALYSIS_SETTINGS['max_supports'],
                     samples: int = ANALYSIS_SETTINGS['surrogate_samples'],
                     seed: int = 0, jobs: int = 1) -> TheoryConstants:
    moduli = compute_moduli(phi, s, delta_mode, max_supports, samples, seed, jobs)
    return constants_from_moduli(moduli, eta, kappa1, kappa2, alpha1, alpha2)


def theory_alpha1(constants: TheoryConstants) -> float:
    """An exponent inside (1 - eps(c), 1): the midpoint of that interval clipped to (0, 1)."""
    return 1.0 - 0.5 * min(constants.epsilon_c, 1.0)


def kappa_scale_for_budget(constants: TheoryConstants, budget: float) -> float:
    """
    Uniform gain scale beta so that kappa_i -> beta * kappa_i meets a time budget.

    The settling bound is inversely proportional to the gains, so
    beta = settle_bound / budget.
    """
    require_positive(budget, "budget")
    if not constants.bound_available:
        raise InvalidConfigurationError(
            f"no settling bound to scale: {constants.bound_unavailable_reason}")
    return constants.settle_bound / budget


# ============================================================================
# SAMPLED CHECKS
# ============================================================================

def check_contraction(problem: SparseProblem, eta: float, x_ref,
                      samples: Iterable, c: Optional[float] = None) -> float:
    """
    Largest ||z(x) - x_ref|| / ||x - x_ref|| over the samples.

    Samples equal to x_ref are skipped; with nothing left the result is 0.
    When c is given, violations are counted in the log.
    """
    x_ref = as_vector(x_ref, problem.n, "x_ref")
    worst = 0.0
    violations = 0
    for x in samples:
        x = as_vector(x, problem.n, "sample")
        gap = float(np.linalg.norm(x - x_ref))
        if gap == 0.0:
            continue
        ratio = float(np.linalg.norm(prox_step(problem, x, eta).z - x_ref)) / gap
        worst = max(worst, ratio)
        if c is not None and ratio > c:
            violations += 1
    if violations:
        logger.warning(f"{violations} samples exceed the contraction factor c={c:.6g}")
    return worst


def observed_moduli(problem: SparseProblem, pairs: Iterable) -> Tuple[float, float]:
    """
    (min <F(x)-F(w), x-w> / ||x-w||^2,  max ||F(x)-F(w)|| / ||x-w||) over pairs (x, w).

    For s-sparse pairs these are bounded by mu from below and L from above.
    """
    lowest, highest = math.inf, 0.0
    for x, w in pairs:
        diff = as_vector(x, problem.n, "x") - as_vector(w, problem.n, "w")
        gap2 = float(np.dot(diff, diff))
        if gap2 == 0.0:
            continue
        dgrad = grad_f(problem, x) - grad_f(problem, w)
        lowest = min(lowest, float(np.dot(dgrad, diff)) / gap2)
        highest = max(highest, float(np.linalg.norm(dgrad)) / math.sqrt(gap2))
    return lowest, highest
