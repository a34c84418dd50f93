"""
Right-hand sides of the continuous-time solvers.

CAPPA         dx/dt = -k1 r / ||r||^(1-a1) - k2 r / ||r||^(1-a2),  r = x - z(x)
nominal PDS   dx/dt = -r
LCA           du/dt = (phi^T y - u - (phi^T phi - I) a) / tau,      a = T(u)
FT-LCA        du/dt = du_LCA * ||du_LCA||^(p - 1)

The LCA and FT-LCA forms are the standard soft-threshold LCA and a signed
fractional-power stand-in for the finite-time variant. They serve as benchmark
baselines only; their parameterization does not reproduce any particular
published tuning.

The *_rhs functions are pure. The Dynamics classes bundle a right-hand side
with its residual monitor so the integrator can treat every flow alike.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from config.settings import CAPPA_SETTINGS, LCA_SETTINGS, PDS_SETTINGS, PROBLEM_SETTINGS
from src.problem.problem_model import SparseProblem
from src.solvers.prox_core import grad_f, prox_step, soft_threshold
from src.utils.exceptions import InvalidArgumentError
from src.utils.validator import as_vector, require_open_interval, require_positive


@dataclass(frozen=True)
class CappaParams:
    """Gains, exponents and prox step of the CAPPA flow."""

    kappa1: float = CAPPA_SETTINGS['kappa1']
    kappa2: float = CAPPA_SETTINGS['kappa2']
    alpha1: float = CAPPA_SETTINGS['alpha1']
    alpha2: float = CAPPA_SETTINGS['alpha2']
    eta: float = CAPPA_SETTINGS['eta']
    strict: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        require_positive(self.eta, "eta")
        if not self.strict:
            return
        require_positive(self.kappa1, "kappa1")
        require_positive(self.kappa2, "kappa2")
        require_open_interval(self.alpha1, 0.0, 1.0, "alpha1")
        if not self.alpha2 > 1:
            raise InvalidArgumentError(f"alpha2 must exceed 1, got {self.alpha2}")

    def scaled(self, beta: float) -> "CappaParams":
        """Both gains multiplied by beta."""
        return CappaParams(self.kappa1 * beta, self.kappa2 * beta,
                           self.alpha1, self.alpha2, self.eta, self.strict)


@dataclass(frozen=True)
class LcaParams:
    tau: float = LCA_SETTINGS['tau']
    threshold: float = PROBLEM_SETTINGS['lambda']
    ft_exponent: float = LCA_SETTINGS['ft_exponent']

    def __post_init__(self):
        require_positive(self.tau, "tau")
        require_positive(self.threshold, "threshold")
        require_open_interval(self.ft_exponent, 0.0, 1.0, "ft_exponent")

    @classmethod
    def for_problem(cls, problem: SparseProblem, **overrides) -> "LcaParams":
        """Defaults with the threshold set to the problem's lambda."""
        threshold = overrides.pop('threshold', None) or LCA_SETTINGS['threshold'] or problem.lam
        return cls(threshold=threshold, **overrides)


def _power_field(r: np.ndarray, norm: float, params: CappaParams) -> np.ndarray:
    return -(params.kappa1 * norm ** params.alpha1
             + params.kappa2 * norm ** params.alpha2) * (r / norm)


def cappa_rhs(problem: SparseProblem, params: CappaParams, x,
              singular_tol: float = CAPPA_SETTINGS['singular_tol']) -> np.ndarray:
    """
    CAPPA vector field at x.

    Both terms have magnitude k_i * ||r||^a_i along -r/||r||, so the field is
    continuous and vanishes at equilibria. At ||r|| <= singular_tol the exact
    zero vector is returned.
    """
    x = as_vector(x, problem.n, "x")
    r = x - prox_step(problem, x, params.eta).z
    norm = float(np.linalg.norm(r))
    if norm <= singular_tol:
        return np.zeros_like(r)
    return _power_field(r, norm, params)


def nominal_pds_rhs(problem: SparseProblem, eta: float, x) -> np.ndarray:
    """Proximal dynamical system -(x - z(x))."""
    x = as_vector(x, problem.n, "x")
    return prox_step(problem, x, eta).z - x


def lca_rhs(problem: SparseProblem, params: LcaParams, u,
            finite_time: bool = False,
            singular_tol: float = LCA_SETTINGS['singular_tol']) -> Tuple[np.ndarray, np.ndarray]:
    """
    LCA internal-state derivative and thresholded output.

    Returns (du, a). With finite_time the derivative is rescaled to
    du * ||du||^(ft_exponent - 1), keeping its direction.
    """
    u = as_vector(u, problem.n, "u")
    a = soft_threshold(u, params.threshold)
    # phi^T y - u - (G - I) a  ==  a - u - F(a)
    du = (a - u - grad_f(problem, a)) / params.tau
    if finite_time:
        norm = float(np.linalg.norm(du))
        if norm <= singular_tol:
            return np.zeros_like(du), a
        du = du * norm ** (params.ft_exponent - 1.0)
    return du, a


# ============================================================================
# DYNAMICS EVALUATORS
# ============================================================================

@dataclass(frozen=True)
class FlowEvaluation:
    """Derivative at a state plus the fixed-point residual used for stopping."""

    derivative: np.ndarray
    residual: float


class Dynamics(ABC):
    """A flow the integrator can step: evaluate() and output()."""

    name = "dynamics"

    @abstractmethod
    def evaluate(self, state: np.ndarray) -> FlowEvaluation:
        ...

    def output(self, state: np.ndarray) -> np.ndarray:
        """The signal estimate carried by a state."""
        return state

    def initial_state(self, x0: np.ndarray) -> np.ndarray:
        """Map a signal-space starting point to the flow's state."""
        return np.array(x0, dtype=np.float64, copy=True)


class CappaDynamics(Dynamics):
    name = "cappa"

    def __init__(self, problem: SparseProblem, params: CappaParams,
                 singular_tol: float = CAPPA_SETTINGS['singular_tol']):
        self.problem = problem
        self.params = params
        self.singular_tol = singular_tol

    def evaluate(self, state):
        r = state - prox_step(self.problem, state, self.params.eta).z
        norm = float(np.linalg.norm(r))
        if norm <= self.singular_tol:
            return FlowEvaluation(np.zeros_like(r), norm)
        return FlowEvaluation(_power_field(r, norm, self.params), norm)


class NominalPdsDynamics(Dynamics):
    name = "pds"

    def __init__(self, problem: SparseProblem, eta: float = PDS_SETTINGS['eta']):
        self.problem = problem
        self.eta = require_positive(eta, "eta")

    def evaluate(self, state):
        ev = prox_step(self.problem, state, self.eta)
        return FlowEvaluation(ev.z - state, ev.fixed_point_residual)


class LcaDynamics(Dynamics):
    """LCA and its finite-time stand-in; the state is the internal potential u."""

    def __init__(self, problem: SparseProblem, params: LcaParams,
                 finite_time: bool = False,
                 monitor_eta: float = LCA_SETTINGS['monitor_eta'],
                 singular_tol: float = LCA_SETTINGS['singular_tol']):
        self.problem = problem
        self.params = params
        self.finite_time = finite_time
        self.monitor_eta = require_positive(monitor_eta, "monitor_eta")
        self.singular_tol = singular_tol
        self.name = "ft_lca" if finite_time else "lca"

    def evaluate(self, state):
        du, a = lca_rhs(self.problem, self.params, state, self.finite_time, self.singular_tol)
        residual = prox_step(self.problem, a, self.monitor_eta).fixed_point_residual
        return FlowEvaluation(du, residual)

    def output(self, state):
        return soft_threshold(state, self.params.threshold)

    def initial_state(self, x0):
        """The potential whose thresholded output is x0."""
        x0 = np.asarray(x0, dtype=np.float64)
        return x0 + self.params.threshold * np.sign(x0)


class FunctionDynamics(Dynamics):
    """Wraps a plain callable; the residual defaults to ||rhs(x)||."""

    def __init__(self, rhs: Callable[[np.ndarray], np.ndarray],
                 residual: Optional[Callable[[np.ndarray], float]] = None,
                 name: str = "function"):
        self.rhs = rhs
        self.residual = residual
        self.name = name

    def evaluate(self, state):
        d = np.asarray(self.rhs(state), dtype=np.float64)
        res = self.residual(state) if self.residual else float(np.linalg.norm(d))
        return FlowEvaluation(d, float(res))


def build_dynamics(name: str, problem: SparseProblem,
                   cappa: Optional[CappaParams] = None,
                   pds_eta: float = PDS_SETTINGS['eta'],
                   lca: Optional[LcaParams] = None,
                   monitor_eta: float = LCA_SETTINGS['monitor_eta']) -> Dynamics:
    """Flow evaluator for a solver name: cappa, pds, lca or ft_lca."""
    if name == "cappa":
        return CappaDynamics(problem, cappa or CappaParams())
    if name == "pds":
        return NominalPdsDynamics(problem, pds_eta)
    if name in ("lca", "ft_lca"):
        return LcaDynamics(problem, lca or LcaParams.for_problem(problem),
                           finite_time=(name == "ft_lca"), monitor_eta=monitor_eta)
    raise InvalidArgumentError(f"unknown flow solver '{name}'")
