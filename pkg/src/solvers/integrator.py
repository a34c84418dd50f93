"""
Fixed-step integration of the solver flows.

Only fixed steps are offered: the CAPPA field is not Lipschitz at its
equilibrium, and the reference experiments use plain Euler. RK4 exists for
step-size cross checks.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from config.settings import INTEGRATOR_SETTINGS
from src.solvers.dynamics import Dynamics, FlowEvaluation
from src.utils.exceptions import DivergenceError, InvalidArgumentError
from src.utils.logger import get_logger
from src.utils.validator import require_nonnegative, require_positive
from src.utils.workers import run_tasks

logger = get_logger(__name__)


class Scheme(str, Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = INTEGRATOR_SETTINGS['dt']
    t_max: float = INTEGRATOR_SETTINGS['t_max']
    stop_residual: float = INTEGRATOR_SETTINGS['stop_residual']
    record_stride: int = INTEGRATOR_SETTINGS['record_stride']
    scheme: Scheme = Scheme(INTEGRATOR_SETTINGS['scheme'])
    stop_on_settle: bool = False
    record_states: bool = True

    def __post_init__(self):
        require_positive(self.dt, "dt")
        require_nonnegative(self.stop_residual, "stop_residual")
        if not self.dt <= self.t_max:
            raise InvalidArgumentError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InvalidArgumentError(f"record_stride must be >= 1, got {self.record_stride}")
        object.__setattr__(self, 'scheme', Scheme(self.scheme))

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_max / self.dt + 1e-9))

    @property
    def is_degenerate(self) -> bool:
        """A single step covers the whole horizon."""
        return self.n_steps <= 1

    def replace(self, **changes) -> "IntegratorConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class Trajectory:
    """Recorded samples of one integration run."""

    times: np.ndarray
    states: np.ndarray
    residuals: np.ndarray
    error_to_ref: Optional[np.ndarray]
    lyapunov: Optional[np.ndarray]
    final_state: np.ndarray
    wall_clock_ns: int
    steps_taken: int
    converged: bool
    settle_time: Optional[float]
    solver: str = ""
    diverged: bool = False

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1])

    @property
    def final_error(self) -> Optional[float]:
        return None if self.error_to_ref is None else float(self.error_to_ref[-1])

    @property
    def settled(self) -> bool:
        return self.settle_time is not None

    @property
    def wall_clock_seconds(self) -> float:
        return self.wall_clock_ns * 1e-9


@dataclass
class _Recorder:
    record_states: bool
    with_reference: bool
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)

    def add(self, t, state, residual, error):
        self.times.append(t)
        if self.record_states:
            self.states.append(state.copy())
        self.residuals.append(residual)
        if self.with_reference:
            self.errors.append(error)

    def build(self, final_state, wall_clock_ns, steps, converged, settle_time,
              solver, diverged=False) -> Trajectory:
        n = final_state.shape[0]
        errors = np.asarray(self.errors) if self.with_reference else None
        return Trajectory(
            times=np.asarray(self.times),
            states=np.asarray(self.states) if self.states else np.empty((0, n)),
            residuals=np.asarray(self.residuals),
            error_to_ref=errors,
            lyapunov=None if errors is None else 0.5 * errors ** 2,
            final_state=final_state.copy(),
            wall_clock_ns=int(wall_clock_ns),
            steps_taken=int(steps),
            converged=bool(converged),
            settle_time=settle_time,
            solver=solver,
            diverged=diverged,
        )


def _advance(dynamics: Dynamics, state: np.ndarray, ev: FlowEvaluation,
             dt: float, scheme: Scheme) -> np.ndarray:
    if scheme is Scheme.EULER:
        return state + dt * ev.derivative
    k1 = ev.derivative
    k2 = dynamics.evaluate(state + 0.5 * dt * k1).derivative
    k3 = dynamics.evaluate(state + 0.5 * dt * k2).derivative
    k4 = dynamics.evaluate(state + dt * k3).derivative
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(dynamics: Dynamics, x0, config: IntegratorConfig,
              reference=None, settle_tol: float = 0.0) -> Trajectory:
    """
    Integrate a flow from x0 with a fixed step.

    Stops at t_max, when the fixed-point residual reaches config.stop_residual,
    or (with config.stop_on_settle) when the error to the reference first
    drops to settle_tol. The settle crossing is checked on every step and
    interpolated linearly between the two bracketing steps.
    """
    require_nonnegative(settle_tol, "settle_tol")
    state = dynamics.initial_state(np.asarray(x0, dtype=np.float64))
    ref = None if reference is None else np.asarray(reference, dtype=np.float64)
    if ref is not None and ref.shape != dynamics.output(state).shape:
        raise InvalidArgumentError(f"reference has shape {ref.shape}, expected {state.shape}")

    dt, n_steps, stride = config.dt, config.n_steps, int(config.record_stride)
    recorder = _Recorder(config.record_states, ref is not None)
    settle_time = None
    prev_error = None
    converged = False
    step = 0

    start = time.perf_counter_ns()
    ev = dynamics.evaluate(state)
    while True:
        t = step * dt
        error = None
        if ref is not None:
            error = float(np.linalg.norm(dynamics.output(state) - ref))
            if settle_time is None and error <= settle_tol:
                if prev_error is None:
                    settle_time = t
                else:
                    frac = (prev_error - settle_tol) / (prev_error - error)
                    settle_time = (step - 1 + frac) * dt
        converged = ev.residual <= config.stop_residual
        last = (converged or step >= n_steps
                or (config.stop_on_settle and settle_time is not None))
        if last or step % stride == 0:
            recorder.add(t, state, ev.residual, error)
        if last:
            break

        next_state = _advance(dynamics, state, ev, dt, config.scheme)
        if not np.all(np.isfinite(next_state)):
            elapsed = time.perf_counter_ns() - start
            partial = recorder.build(state, elapsed, step, False, settle_time,
                                     dynamics.name, diverged=True)
            logger.error(f"{dynamics.name}: non-finite state at step {step + 1}")
            raise DivergenceError(step + 1, state.copy(), partial)
        state = next_state
        step += 1
        prev_error = error
        ev = dynamics.evaluate(state)

    elapsed = time.perf_counter_ns() - start
    trajectory = recorder.build(state, elapsed, step, converged, settle_time, dynamics.name)
    logger.debug(f"{dynamics.name}: {step} steps, converged={converged}, "
                 f"settle_time={settle_time}, wall={elapsed * 1e-6:.1f} ms")
    return trajectory


# ============================================================================
# SWEEPS
# ============================================================================

@dataclass(frozen=True)
class SettlePoint:
    initial_norm: float
    settle_time: Optional[float]


def _sweep_task(args) -> SettlePoint:
    index, dynamics, x0, config, reference, settle_tol = args
    try:
        traj = integrate(dynamics, x0, config, reference, settle_tol)
    except DivergenceError as e:
        raise e.tagged(index) from e
    return SettlePoint(float(np.linalg.norm(np.asarray(x0) - reference)), traj.settle_time)


def settle_time_sweep(dynamics: Dynamics, x0_list: Sequence, config: IntegratorConfig,
                      reference, settle_tol: float, jobs: int = 1) -> List[SettlePoint]:
    """Settle time of each start, paired with ||x0 - reference||."""
    if len(x0_list) == 0:
        raise InvalidArgumentError("x0_list must not be empty")
    require_positive(settle_tol, "settle_tol")
    reference = np.asarray(reference, dtype=np.float64)
    config = config.replace(stop_on_settle=True, record_states=False)
    tasks = [(i, dynamics, np.asarray(x0, dtype=np.float64), config, reference, settle_tol)
             for i, x0 in enumerate(x0_list)]
    return run_tasks(_sweep_task, tasks, jobs)


def settle_time_trend(points: Sequence[SettlePoint]) -> float:
    """Spearman correlation of settle time against initial norm (unsettled runs rank last)."""
    norms = np.array([p.initial_norm for p in points])
    times = np.array([np.inf if p.settle_time is None else p.settle_time for p in points])
    if len(points) < 2 or np.all(times == times[0]) or np.all(norms == norms[0]):
        return float("nan")
    return float(stats.spearmanr(norms, times)[0])


def step_halving_discrepancy(dynamics: Dynamics, x0, config: IntegratorConfig) -> float:
    """Max state gap between runs at dt and dt/2 over the coarse steps both runs reached."""
    coarse = integrate(dynamics, x0, config.replace(record_stride=1, record_states=True))
    fine = integrate(dynamics, x0, config.replace(dt=config.dt / 2.0, record_stride=2,
                                                  record_states=True))
    coarse_steps = np.rint(coarse.times / config.dt).astype(np.int64)
    fine_steps = np.rint(fine.times / (config.dt / 2.0)).astype(np.int64)
    even = fine_steps % 2 == 0
    _, ci, fi = np.intersect1d(coarse_steps, fine_steps[even] // 2, return_indices=True)
    gaps = np.linalg.norm(coarse.states[ci] - fine.states[even][fi], axis=1)
    return float(np.max(gaps))
