#!/usr/bin/env python3
"""
Smoke check for a fresh install

Builds a small certified instance, prints its theory constants and runs every
solver on it once. Exits non-zero when any solver misses its KKT target.

Usage:
    python scripts/smoke_check.py [--seed N]
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from config.settings import APP_NAME, FLOW_SOLVERS, VERSION  # noqa: E402
from src.analysis.constants import (  # noqa: E402
    compute_moduli,
    constants_from_moduli,
    theory_alpha1,
)
from src.problem.problem_model import generate_gaussian_instance  # noqa: E402
from src.solvers.dynamics import CappaParams, build_dynamics  # noqa: E402
from src.solvers.integrator import IntegratorConfig, integrate  # noqa: E402
from src.solvers.prox_core import kkt_residual  # noqa: E402
from src.solvers.reference_solver import fista_solve, ista_solve  # noqa: E402
from src.utils.logger import setup_logger  # noqa: E402

FLOW_KKT_TARGET = 1e-3


def main():
    parser = argparse.ArgumentParser(description=f"{APP_NAME} smoke check")
    parser.add_argument('--seed', type=int, default=1)
    args = parser.parse_args()
    setup_logger("smoke_check", log_to_file=False)

    print(f"{APP_NAME} {VERSION} / numpy {np.__version__}")
    bundle = generate_gaussian_instance(n=20, m=15, s=1, sigma=0.0, lam=0.05, seed=args.seed)
    problem = bundle.problem

    moduli = compute_moduli(problem.phi, 1, delta_mode="exact")
    eta = 0.5 * moduli.eta_max
    first_pass = constants_from_moduli(moduli, eta, alpha1=0.5)
    constants = constants_from_moduli(moduli, eta, alpha1=theory_alpha1(first_pass))
    for key, value in constants.as_report().items():
        print(f"  {key:14s} {value}")

    failures = 0
    reference = fista_solve(problem)
    for name, solution in (("fista", reference), ("ista", ista_solve(problem))):
        ok = solution.converged
        failures += not ok
        print(f"{name:7s} kkt={solution.kkt_residual:.2e} iterations={solution.iterations} "
              f"{'OK' if ok else 'FAIL'}")

    config = IntegratorConfig(dt=1e-3, t_max=30.0, record_states=False)
    for name in FLOW_SOLVERS:
        dynamics = build_dynamics(name, problem, cappa=CappaParams(alpha1=0.9))
        traj = integrate(dynamics, np.zeros(problem.n), config, reference.x_ref)
        kkt = kkt_residual(problem, dynamics.output(traj.final_state))
        ok = kkt <= FLOW_KKT_TARGET
        failures += not ok
        print(f"{name:7s} kkt={kkt:.2e} error={traj.final_error:.2e} "
              f"{'OK' if ok else 'FAIL'}")

    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
