"""Problem instances: types, synthetic generation and persistence."""

from src.problem.bundle_io import load_bundle, save_bundle
from src.problem.problem_model import (
    GroundTruth,
    ProblemBundle,
    SparseProblem,
    generate_gaussian_instance,
)

__all__ = [
    "GroundTruth",
    "ProblemBundle",
    "SparseProblem",
    "generate_gaussian_instance",
    "load_bundle",
    "save_bundle",
]
