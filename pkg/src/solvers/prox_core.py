"""
Smooth gradient, soft thresholding and the forward-backward map.

For f(x) = 0.5 * ||y - phi x||^2 and g(x) = lam * ||x||_1:

    F(x)  = phi^T (phi x - y)
    z(x)  = prox_{eta g}(x - eta F(x)) = soft_threshold(x - eta F(x), eta lam)

x is an equilibrium of every flow in this package iff x = z(x), which is the
case iff x minimizes f + g.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from config.settings import PROX_SETTINGS
from src.problem.problem_model import SparseProblem
from src.utils.exceptions import InvalidArgumentError
from src.utils.validator import as_vector, require_nonnegative, require_positive


@dataclass(frozen=True)
class ProxEvaluation:
    """Value of the prox map at x and the distance ||x - z(x)||."""

    z: np.ndarray
    fixed_point_residual: float


def grad_f(problem: SparseProblem, x) -> np.ndarray:
    """Gradient of 0.5 * ||y - phi x||^2, i.e. phi^T phi x - phi^T y."""
    x = as_vector(x, problem.n, "x")
    if problem.has_gram:
        return problem.gram @ x - problem.phi_t_y
    return problem.phi.T @ (problem.phi @ x - problem.y)


def soft_threshold(v, tau: float) -> np.ndarray:
    """Elementwise sign(v) * max(|v| - tau, 0), with sign(0) = 0."""
    if not tau >= 0:
        raise InvalidArgumentError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def prox_step(problem: SparseProblem, x, eta: float) -> ProxEvaluation:
    """Evaluate z(x) and the fixed-point residual ||x - z(x)||."""
    require_positive(eta, "eta")
    x = as_vector(x, problem.n, "x")
    z = soft_threshold(x - eta * grad_f(problem, x), eta * problem.lam)
    return ProxEvaluation(z=z, fixed_point_residual=float(np.linalg.norm(x - z)))


def kkt_residual(problem: SparseProblem, x, zero_tol: float = PROX_SETTINGS['zero_tol']) -> float:
    """
    Largest violation of the l1 subgradient optimality condition.

    On coordinates with |x_i| > zero_tol the gradient must equal
    -lam * sign(x_i); elsewhere it must lie in [-lam, lam].
    """
    require_positive(zero_tol, "zero_tol")
    x = as_vector(x, problem.n, "x")
    g = grad_f(problem, x)
    active = np.abs(x) > zero_tol
    violation = np.where(
        active,
        np.abs(g + problem.lam * np.sign(x)),
        np.maximum(np.abs(g) - problem.lam, 0.0),
    )
    return float(np.max(violation)) if violation.size else 0.0


def support(x, tol: float = PROX_SETTINGS['zero_tol']) -> np.ndarray:
    """Sorted indices with |x_i| > tol."""
    require_nonnegative(tol, "tol")
    return np.flatnonzero(np.abs(np.asarray(x, dtype=np.float64)) > tol)
