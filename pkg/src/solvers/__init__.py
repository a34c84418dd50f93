"""Proximal operators, continuous-time flows, their integrator and reference solvers."""

from src.solvers.dynamics import (
    CappaDynamics,
    CappaParams,
    Dynamics,
    LcaDynamics,
    LcaParams,
    NominalPdsDynamics,
    build_dynamics,
    cappa_rhs,
    lca_rhs,
    nominal_pds_rhs,
)
from src.solvers.integrator import IntegratorConfig, Trajectory, integrate
from src.solvers.prox_core import grad_f, kkt_residual, prox_step, soft_threshold, support
from src.solvers.reference_solver import ReferenceSolution, fista_solve, ista_solve, objective

__all__ = [
    "CappaDynamics",
    "CappaParams",
    "Dynamics",
    "IntegratorConfig",
    "LcaDynamics",
    "LcaParams",
    "NominalPdsDynamics",
    "ReferenceSolution",
    "Trajectory",
    "build_dynamics",
    "cappa_rhs",
    "fista_solve",
    "grad_f",
    "integrate",
    "ista_solve",
    "kkt_residual",
    "lca_rhs",
    "nominal_pds_rhs",
    "objective",
    "prox_step",
    "soft_threshold",
    "support",
]
