"""
Input validation helpers shared by the solver modules.

All helpers raise InvalidArgumentError with a message naming the argument.
"""

from __future__ import annotations

import numpy as np

from src.utils.exceptions import InvalidArgumentError


def as_vector(value, length: int, name: str = "x") -> np.ndarray:
    """Return value as a float64 1-D array of the given length."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a vector, got shape {arr.shape}")
    if arr.shape[0] != length:
        raise InvalidArgumentError(f"{name} has length {arr.shape[0]}, expected {length}")
    return arr


def require_positive(value: float, name: str) -> float:
    if not value > 0:
        raise InvalidArgumentError(f"{name} must be positive, got {value}")
    return float(value)


def require_nonnegative(value: float, name: str) -> float:
    if not value >= 0:
        raise InvalidArgumentError(f"{name} must be nonnegative, got {value}")
    return float(value)


def require_open_interval(value: float, low: float, high: float, name: str) -> float:
    if not low < value < high:
        raise InvalidArgumentError(f"{name} must lie in ({low}, {high}), got {value}")
    return float(value)


def require_positive_int(value: int, name: str) -> int:
    if int(value) != value or value < 1:
        raise InvalidArgumentError(f"{name} must be a positive integer, got {value}")
    return int(value)


def require_seed(value: int, name: str = "seed") -> int:
    if int(value) != value or not 0 <= value < 2 ** 64:
        raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return int(value)
