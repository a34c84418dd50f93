"""
Exception hierarchy for cappa-bench.

Every error raised on purpose by the library derives from CappaError so the
command line can map it to an exit code.
"""

from __future__ import annotations

from typing import Any, Optional

import numpy as np


class CappaError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(CappaError, ValueError):
    """An argument has the wrong shape, sign or range."""


class InvalidConfigurationError(CappaError):
    """A configuration is inconsistent (dimensions, step sizes, experiment file)."""


class BundleParseError(CappaError):
    """A problem file could not be decoded."""

    def __init__(self, record: str, message: str):
        super().__init__(f"{record}: {message}")
        self.record = record


class BundleIntegrityError(CappaError):
    """A problem file decoded but its contents are inconsistent."""


class DivergenceError(CappaError):
    """The integrated state became non-finite."""

    def __init__(self, step: int, last_state: np.ndarray,
                 trajectory: Optional[Any] = None, run_index: Optional[int] = None):
        self.step = step
        self.last_state = last_state
        self.trajectory = trajectory
        self.run_index = run_index
        super().__init__(self._describe())

    def _describe(self) -> str:
        prefix = f"run {self.run_index}: " if self.run_index is not None else ""
        return f"{prefix}non-finite state at step {self.step}"

    def tagged(self, run_index: int) -> "DivergenceError":
        """Return a copy of this error attributed to a sweep run."""
        return DivergenceError(self.step, self.last_state, self.trajectory, run_index)


class CapacityError(CappaError):
    """Exhaustive enumeration would exceed the configured guard."""


class NonCertifiedConstantsError(CappaError):
    """Certified constants were requested but delta came from a sampled bound."""
