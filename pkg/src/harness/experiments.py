"""
Benchmark experiments.

Each run_* function takes an ExperimentConfig and an output directory, writes
its CSV files, an optional SVG figure and manifest.json into
<out>/<experiment>/, and returns an ExperimentResult. Primary CSVs hold only
deterministic values; wall-clock times go to a *_timing.csv sidecar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.experiment_config import ExperimentConfig
from config.settings import CAPPA_SETTINGS, INTEGRATOR_SETTINGS
from src.analysis.constants import (
    RipModuli,
    TheoryConstants,
    compute_moduli,
    constants_from_moduli,
    kappa_scale_for_budget,
    theory_alpha1,
)
from src.harness import plots
from src.harness.csv_writer import write_csv
from src.harness.manifest import RunManifest
from src.problem.bundle_io import load_bundle
from src.problem.problem_model import ProblemBundle, SparseProblem, generate_gaussian_instance
from src.solvers.dynamics import CappaParams, Dynamics, LcaParams, build_dynamics
from src.solvers.integrator import (
    IntegratorConfig,
    SettlePoint,
    Trajectory,
    integrate,
    settle_time_trend,
)
from src.solvers.prox_core import kkt_residual, support
from src.solvers.reference_solver import ReferenceSolution, fista_solve, ista_solve
from src.utils.exceptions import CappaError, DivergenceError, InvalidConfigurationError
from src.utils.logger import get_logger
from src.utils.workers import run_tasks

logger = get_logger(__name__)

# CAPPA run at an exponent inside (1 - eps(c), 1), next to the configured one
THEORY_VARIANT = "cappa_theory"


@dataclass
class ExperimentResult:
    name: str
    directory: Path
    files: List[Path] = field(default_factory=list)
    manifest: Optional[RunManifest] = None
    diverged_runs: int = 0
    summary: Dict[str, object] = field(default_factory=dict)


# ============================================================================
# SHARED PIECES
# ============================================================================

def sub_seed(master_seed: int, *path: int) -> int:
    """Independent 64-bit seed for one run, derived from the master seed."""
    state = np.random.SeedSequence([int(master_seed), *map(int, path)]).generate_state(1, np.uint64)
    return int(state[0])


def load_instance(config: ExperimentConfig, seed: Optional[int] = None,
                  n: Optional[int] = None, m: Optional[int] = None,
                  s: Optional[int] = None) -> ProblemBundle:
    """The configured bundle file, or a Gaussian instance from the [instance] values."""
    inst = config.instance
    if inst.bundle and seed is None and n is None:
        return load_bundle(inst.bundle)
    return generate_gaussian_instance(
        n=n or inst.n, m=m or inst.m, s=s or inst.s, sigma=inst.sigma, lam=inst.lam,
        seed=inst.seed if seed is None else seed)


def prepare_problem(problem: SparseProblem, config: ExperimentConfig) -> SparseProblem:
    return problem.with_gram() if config.cappa.use_gram else problem


def reference_solution(problem: SparseProblem, config: ExperimentConfig) -> ReferenceSolution:
    solution = fista_solve(problem, config.reference_tol, config.reference_max_iter,
                           config.support_tol)
    if not solution.converged:
        logger.warning(f"Reference solve reached max_iter with kkt={solution.kkt_residual:.3e}")
    return solution


def initial_point(x_ref: np.ndarray, direction_seed: int, norm_scale: float,
                  phi: Optional[np.ndarray] = None) -> np.ndarray:
    """
    x_ref + norm_scale * ||x_ref|| * u for a unit direction u drawn from
    PCG64(direction_seed). A zero x_ref uses ||x_ref|| = 1.

    With phi given, u = phi^T w / ||phi^T w|| for Gaussian w, i.e. the start is
    perturbed inside the row space of phi. Null-space components are removed
    only by the shrinkage term, at a speed that does not grow with their size.
    """
    rng = np.random.Generator(np.random.PCG64(direction_seed))
    if phi is None:
        u = rng.standard_normal(x_ref.shape[0])
    else:
        u = phi.T @ rng.standard_normal(phi.shape[0])
    u /= np.linalg.norm(u)
    scale = float(np.linalg.norm(x_ref)) or 1.0
    return x_ref + norm_scale * scale * u


def settle_tolerance(x_ref: np.ndarray, config: ExperimentConfig) -> float:
    return config.integrator.settle_tol_rel * (float(np.linalg.norm(x_ref)) or 1.0)


def integrator_config(config: ExperimentConfig, dt: Optional[float] = None,
                      **changes) -> IntegratorConfig:
    """IntegratorConfig from the [integrator] section, with the record stride
    raised so no run stores more than max_recorded_samples points."""
    section = config.integrator
    dt = section.dt if dt is None else dt
    n_steps = int(math.floor(section.t_max / dt + 1e-9))
    cap = INTEGRATOR_SETTINGS['max_recorded_samples']
    stride = max(int(section.record_stride), math.ceil(n_steps / cap))
    base = IntegratorConfig(dt=dt, t_max=section.t_max, stop_residual=section.stop_residual,
                            record_stride=stride, scheme=section.scheme)
    return base.replace(**changes) if changes else base


def make_dynamics(name: str, problem: SparseProblem, config: ExperimentConfig,
                  alpha1: Optional[float] = None) -> Dynamics:
    """Flow evaluator from the config; alpha1 replaces the configured CAPPA exponent."""
    c = config.cappa
    lca = config.lca
    return build_dynamics(
        "cappa" if name == THEORY_VARIANT else name, problem,
        cappa=CappaParams(c.kappa1, c.kappa2, c.alpha1 if alpha1 is None else alpha1,
                          c.alpha2, c.eta),
        pds_eta=config.pds_eta,
        lca=LcaParams.for_problem(problem, tau=lca.tau, threshold=lca.threshold,
                                  ft_exponent=lca.ft_exponent),
        monitor_eta=lca.monitor_eta,
    )


def _flow_task(args) -> Tuple[Trajectory, bool]:
    dynamics, x0, icfg, x_ref, settle_tol = args
    try:
        return integrate(dynamics, x0, icfg, x_ref, settle_tol), False
    except DivergenceError as e:
        return e.trajectory, True


# ============================================================================
# CONSTANTS REPORT
# ============================================================================

@dataclass
class ConstantsReport:
    moduli: RipModuli
    constants: Optional[TheoryConstants]
    entries: Dict[str, str]

    @property
    def certified(self) -> bool:
        return self.moduli.certified

    def text(self) -> str:
        width = max(len(key) for key in self.entries)
        return "\n".join(f"{key.ljust(width)} = {value}" for key, value in self.entries.items())


def build_constants_report(problem: SparseProblem, s: int, config: ExperimentConfig,
                           budget: Optional[float] = None, jobs: int = 1) -> ConstantsReport:
    """Constants with provenance; an empty or missed eta interval is reported, not raised."""
    moduli = compute_moduli(problem.phi, s, config.delta_mode, config.max_supports,
                            config.surrogate_samples, seed=config.master_seed, jobs=jobs)
    eta = config.cappa.eta
    entries = {
        'order': str(moduli.order),
        'delta_2s': repr(moduli.delta_2s),
        'delta_source': moduli.delta_source.value,
        'certified': str(moduli.certified).lower(),
        'phi_norm': repr(moduli.phi_norm),
        'mu': repr(moduli.mu),
        'L': repr(moduli.L),
        'eta_max': repr(moduli.eta_max),
        'eta_interval': ("empty" if moduli.interval_empty
                         else f"(0, {moduli.eta_max!r})"),
    }

    constants = None
    if moduli.interval_empty:
        entries['settle_bound'] = 'unavailable'
        entries['reason'] = (f"delta_2s = {moduli.delta_2s:.6g} >= 1 leaves no admissible "
                             f"prox step")
    elif not 0 < eta < moduli.eta_max:
        entries['eta'] = repr(eta)
        entries['settle_bound'] = 'unavailable'
        entries['reason'] = f"configured eta={eta} lies outside the admissible interval"
    else:
        c = config.cappa
        constants = constants_from_moduli(moduli, eta, c.kappa1, c.kappa2, c.alpha1, c.alpha2)
        entries.update(constants.as_report())
        if not constants.bound_available:
            entries['reason'] = constants.bound_unavailable_reason
        elif budget is not None:
            entries['budget'] = repr(float(budget))
            entries['kappa_scale'] = repr(kappa_scale_for_budget(constants, budget))
    if not moduli.certified:
        entries['note'] = "delta_2s is a sampled lower bound; constants are not certified"
    return ConstantsReport(moduli=moduli, constants=constants, entries=entries)


def report_constants(config: ExperimentConfig, budget: Optional[float] = None) -> ConstantsReport:
    bundle = load_instance(config)
    s = bundle.truth.s if bundle.truth is not None else config.instance.s
    logger.info(f"Computing constants for n={bundle.problem.n} m={bundle.problem.m} s={s}")
    return build_constants_report(bundle.problem, s, config, budget, config.jobs)


def _instance_report(bundle: ProblemBundle,
                     config: ExperimentConfig) -> Tuple[Optional[ConstantsReport], Dict[str, str]]:
    s = bundle.truth.s if bundle.truth is not None else config.instance.s
    try:
        report = build_constants_report(bundle.problem, s, config)
    except CappaError as e:
        logger.warning(f"Constants unavailable for this instance: {e}")
        return None, {'constants': f"unavailable: {e}"}
    return report, dict(report.entries)


def _header_constants(bundle: ProblemBundle, config: ExperimentConfig) -> Dict[str, str]:
    return _instance_report(bundle, config)[1]


@dataclass(frozen=True)
class TheoryExponent:
    alpha1: float
    source: str

    def header(self) -> Dict[str, str]:
        return {'theory_alpha1': repr(self.alpha1), 'theory_alpha1_source': self.source}


def theory_exponent(report: Optional[ConstantsReport]) -> TheoryExponent:
    """
    alpha1 inside (1 - eps(c), 1) for this instance. Without admissible
    constants (empty eta interval, eta outside it) the configured fallback
    exponent is used and labeled as such.
    """
    if report is not None and report.constants is not None:
        return TheoryExponent(theory_alpha1(report.constants), 'derived')
    fallback = CAPPA_SETTINGS['theory_alpha1_fallback']
    logger.warning(f"No admissible constants; theory variant uses alpha1={fallback}")
    return TheoryExponent(fallback, 'fallback')


def _with_theory_variant(solvers: Sequence[str], config: ExperimentConfig,
                         report: Optional[ConstantsReport]
                         ) -> Tuple[List[str], Optional[TheoryExponent]]:
    """Insert the theory-exponent CAPPA run after 'cappa' when it is enabled."""
    solvers = list(solvers)
    if not (config.cappa.theory_variant and 'cappa' in solvers):
        return solvers, None
    solvers.insert(solvers.index('cappa') + 1, THEORY_VARIANT)
    return solvers, theory_exponent(report)


def _start(name: str, out_dir, config: ExperimentConfig, constants: Dict[str, str],
           seeds: List[Dict[str, object]]) -> Tuple[Path, RunManifest]:
    directory = Path(out_dir) / name
    directory.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(experiment=name, config=config.snapshot(),
                           constants=constants, seeds=seeds)
    logger.info(f"Starting {name} (manifest {manifest.digest[:12]})")
    return directory, manifest


def _finish(result: ExperimentResult) -> ExperimentResult:
    result.files.append(result.manifest.write(result.directory / "manifest.json"))
    logger.info(f"Finished {result.name}: {len(result.files)} files in {result.directory}")
    return result


# ============================================================================
# ERROR DECAY
# ============================================================================

def run_error_decay(config: ExperimentConfig, out_dir, deterministic: bool = True) -> ExperimentResult:
    """Error to the reference over time for every flow solver and start."""
    if not config.init_conditions:
        raise InvalidConfigurationError("error decay needs at least one init condition")
    if not config.flow_solvers:
        raise InvalidConfigurationError("error decay needs at least one flow solver")

    bundle = load_instance(config)
    problem = prepare_problem(bundle.problem, config)
    ref = reference_solution(problem, config)
    x_ref = ref.x_ref
    settle_tol = settle_tolerance(x_ref, config)
    icfg = integrator_config(config)

    report, constants = _instance_report(bundle, config)
    solvers, theory = _with_theory_variant(config.flow_solvers, config, report)
    if theory is not None:
        constants.update(theory.header())
    seeds = [{'instance_seed': config.instance.seed}]
    seeds += [{'direction_seed': d, 'norm_scale': k} for d, k in config.init_conditions]
    directory, manifest = _start("error_decay", out_dir, config, constants, seeds)

    runs = [(solver, d, k) for solver in solvers for d, k in config.init_conditions]
    dynamics = {solver: make_dynamics(solver, problem, config,
                                      theory.alpha1 if solver == THEORY_VARIANT else None)
                for solver in solvers}
    tasks = [(dynamics[solver], initial_point(x_ref, d, k, problem.phi), icfg, x_ref, settle_tol)
             for solver, d, k in runs]
    outcomes = run_tasks(_flow_task, tasks, config.jobs)

    result = ExperimentResult("error_decay", directory, manifest=manifest)
    series_rows, settle_rows, timing_rows = [], [], []
    figure: Dict[str, list] = {solver: [] for solver in solvers}
    points: Dict[str, List[SettlePoint]] = {solver: [] for solver in solvers}
    for (solver, d, k), task, (traj, diverged) in zip(runs, tasks, outcomes):
        init_norm = float(np.linalg.norm(task[1] - x_ref))
        for t, err, res, lyap in zip(traj.times, traj.error_to_ref, traj.residuals, traj.lyapunov):
            series_rows.append((solver, d, init_norm, t, err, res, lyap, diverged))
        settle_rows.append((solver, d, init_norm, traj.settle_time, traj.final_error,
                            traj.final_residual, traj.steps_taken, diverged))
        timing_rows.append((solver, d, init_norm, traj.wall_clock_seconds))
        manifest.wall_clock[f"{solver}/{d}"] = traj.wall_clock_seconds
        figure[solver].append((f"|x0 - x_ref| = {init_norm:.3g}", traj.times, traj.error_to_ref))
        points[solver].append(SettlePoint(init_norm, traj.settle_time))
        result.diverged_runs += int(diverged)

    header = manifest.constants
    digest = manifest.digest
    result.files.append(write_csv(
        directory / "error_decay.csv",
        ("solver", "init_seed", "init_norm", "t", "error", "residual", "lyapunov", "diverged"),
        series_rows, digest, header))
    result.files.append(write_csv(
        directory / "error_decay_settle.csv",
        ("solver", "init_seed", "init_norm", "settle_time", "final_error", "final_residual",
         "steps", "diverged"),
        settle_rows, digest, {'settle_tol': repr(settle_tol)}))
    trends = {solver: settle_time_trend(points[solver]) for solver in solvers}
    result.files.append(write_csv(
        directory / "error_decay_trend.csv", ("solver", "spearman_settle_vs_norm"),
        list(trends.items()), digest))
    result.files.append(write_csv(
        directory / "error_decay_timing.csv", ("solver", "init_seed", "init_norm", "wall_clock_s"),
        timing_rows, digest))
    if config.svg:
        result.files.append(plots.plot_error_decay(figure, directory / "error_decay.svg",
                                                   deterministic))
    result.summary = {'settle_tol': settle_tol, 'trend': trends,
                      'settle_times': {s: [p.settle_time for p in points[s]] for s in solvers},
                      'theory_alpha1': None if theory is None else theory.alpha1}
    return _finish(result)


# ============================================================================
# SIGNAL RECOVERY
# ============================================================================

def run_signal_recovery(config: ExperimentConfig, out_dir,
                        deterministic: bool = True) -> ExperimentResult:
    """
    Terminal CAPPA state against x_ref and x_true, index by index. With the
    theory variant enabled, a second CAPPA run at the theory exponent is
    reported next to the configured one, with its own support summary.
    """
    bundle = load_instance(config)
    if bundle.truth is None:
        raise InvalidConfigurationError("signal recovery needs an instance with ground truth")
    problem = prepare_problem(bundle.problem, config)
    ref = reference_solution(problem, config)
    x_ref = ref.x_ref
    d, k = config.init_conditions[0] if config.init_conditions else (0, 0.0)

    report, constants = _instance_report(bundle, config)
    runs, theory = _with_theory_variant(("cappa",), config, report)
    if theory is not None:
        constants.update(theory.header())
    directory, manifest = _start(
        "signal_recovery", out_dir, config, constants,
        [{'instance_seed': config.instance.seed, 'direction_seed': d, 'norm_scale': k}])

    icfg = integrator_config(config, record_states=False)
    x0 = initial_point(x_ref, d, k, problem.phi)
    settle_tol = settle_tolerance(x_ref, config)
    tol = config.support_tol
    ref_support = support(x_ref, tol)
    x_true = bundle.truth.x_true

    estimates: Dict[str, np.ndarray] = {}
    summary: Dict[str, object] = {
        'support_x_ref': len(ref_support),
        'support_x_true': len(support(x_true, tol)),
    }
    diverged_runs = 0
    for name in runs:
        alpha1 = theory.alpha1 if name == THEORY_VARIANT else None
        traj, diverged = _flow_task((make_dynamics(name, problem, config, alpha1),
                                     x0, icfg, x_ref, settle_tol))
        x_flow = traj.final_state
        own = support(x_flow, tol)
        suffix = "" if name == "cappa" else "_theory"
        summary[f'support_cappa{suffix}'] = len(own)
        summary[f'supports_match{suffix}'] = bool(np.array_equal(own, ref_support))
        summary[f'max_abs_diff{suffix}'] = float(np.max(np.abs(x_flow - x_ref)))
        summary[f'diverged{suffix}'] = diverged
        manifest.wall_clock[name] = traj.wall_clock_seconds
        estimates[name] = x_flow
        diverged_runs += int(diverged)
    if theory is not None:
        summary['theory_alpha1'] = theory.alpha1
        summary['theory_alpha1_source'] = theory.source

    result = ExperimentResult("signal_recovery", directory, manifest=manifest,
                              diverged_runs=diverged_runs, summary=summary)
    header = dict(manifest.constants)
    header.update({key: _header_cell(value) for key, value in summary.items()})
    columns = [f"x_{name}" for name in runs]
    rows = [(i, *(estimates[name][i] for name in runs), x_ref[i], x_true[i])
            for i in range(problem.n)]
    result.files.append(write_csv(directory / "signal_recovery.csv",
                                  ("index", *columns, "x_ref", "x_true"),
                                  rows, manifest.digest, header))
    if config.svg:
        result.files.append(plots.plot_signal_recovery(
            estimates["cappa"], x_ref, x_true, directory / "signal_recovery.svg", deterministic))
    return _finish(result)


def _header_cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, str):
        return value
    return repr(value)


# ============================================================================
# WALL-CLOCK TRIALS
# ============================================================================

@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    solver: str
    settled: bool
    settle_time: Optional[float]
    steps: int
    diverged: bool
    wall_clock_s: float


def _trial_task(args) -> List[TrialRecord]:
    trial, seed, config, size = args
    if size is None:
        bundle = load_instance(config) if config.instance.bundle else load_instance(config, seed)
    else:
        bundle = load_instance(config, seed, *size)
    problem = prepare_problem(bundle.problem, config)
    x_ref = reference_solution(problem, config).x_ref
    d, k = config.init_conditions[trial % len(config.init_conditions)]
    x0 = initial_point(x_ref, sub_seed(seed, d), k, problem.phi)
    settle_tol = settle_tolerance(x_ref, config)
    icfg = integrator_config(config, stop_on_settle=True, record_states=False)

    records = []
    for solver in config.flow_solvers:
        traj, diverged = _flow_task((make_dynamics(solver, problem, config), x0, icfg,
                                     x_ref, settle_tol))
        records.append(TrialRecord(trial, seed, solver, traj.settled, traj.settle_time,
                                   traj.steps_taken, diverged, traj.wall_clock_seconds))
    return records


def _run_trials(config: ExperimentConfig, count: int,
                size: Optional[Tuple[int, int, int]] = None) -> List[TrialRecord]:
    tasks = [(i, sub_seed(config.master_seed, i), config, size) for i in range(count)]
    return [rec for batch in run_tasks(_trial_task, tasks, config.jobs) for rec in batch]


def wallclock_summary(records: Sequence[TrialRecord]) -> Dict[str, Dict[str, float]]:
    """min/mean/max wall-clock per solver over settled trials, with counts."""
    summary: Dict[str, Dict[str, float]] = {}
    for solver in dict.fromkeys(r.solver for r in records):
        mine = [r for r in records if r.solver == solver]
        times = [r.wall_clock_s for r in mine if r.settled and not r.diverged]
        summary[solver] = {
            'trials': len(mine),
            'settled': len(times),
            'min': min(times) if times else math.nan,
            'mean': float(np.mean(times)) if times else math.nan,
            'max': max(times) if times else math.nan,
        }
    return summary


def _trial_seeds(config: ExperimentConfig, count: int) -> List[Dict[str, object]]:
    return [{'trial': i, 'seed': sub_seed(config.master_seed, i)} for i in range(count)]


def run_wallclock_trials(config: ExperimentConfig, out_dir,
                         deterministic: bool = True) -> ExperimentResult:
    """
    Time every flow solver to the shared stopping rule (error to the trial's
    own reference <= settle_tol) over randomized trials. Each trial redraws
    phi, the signal, the noise and the start; with a bundle file only the
    start is redrawn.
    """
    if config.trials < 2:
        raise InvalidConfigurationError("wall-clock trials need trials >= 2")
    if not config.flow_solvers:
        raise InvalidConfigurationError("wall-clock trials need at least one flow solver")
    bundle = load_instance(config)
    directory, manifest = _start("wallclock_trials", out_dir, config,
                                 _header_constants(bundle, config),
                                 _trial_seeds(config, config.trials))

    records = _run_trials(config, config.trials)
    result = ExperimentResult("wallclock_trials", directory, manifest=manifest,
                              diverged_runs=sum(r.diverged for r in records))
    digest = manifest.digest
    result.files.append(write_csv(
        directory / "trials.csv",
        ("trial", "seed", "solver", "settled", "settle_time", "steps", "diverged"),
        [(r.trial, r.seed, r.solver, r.settled, r.settle_time, r.steps, r.diverged)
         for r in records],
        digest, manifest.constants))

    summary = wallclock_summary(records)
    timing_rows = [(r.trial, r.solver, r.wall_clock_s) for r in records]
    timing_rows += [(stat, solver, values[stat]) for solver, values in summary.items()
                    for stat in ("min", "mean", "max")]
    result.files.append(write_csv(directory / "trials_timing.csv",
                                  ("trial", "solver", "wall_clock_s"), timing_rows, digest))
    for r in records:
        manifest.wall_clock[f"{r.trial}/{r.solver}"] = r.wall_clock_s
    if config.svg:
        per_solver = {s: [r.wall_clock_s for r in records if r.solver == s] for s in summary}
        result.files.append(plots.plot_wallclock_trials(
            per_solver, directory / "trials.svg", deterministic))
    result.summary = summary
    return _finish(result)


# ============================================================================
# SIZE SWEEP
# ============================================================================

def scaled_sparsity(config: ExperimentConfig, n: int) -> int:
    """s scaled in proportion to n, at least 1."""
    return max(1, int(round(config.instance.s * n / config.instance.n)))


def run_size_sweep(config: ExperimentConfig, out_dir,
                   deterministic: bool = True) -> ExperimentResult:
    """Wall-clock trials at each (n, m) of the sweep with s scaled along."""
    if not config.nm_sweep:
        raise InvalidConfigurationError("size sweep needs at least one (n, m) point")
    if not config.flow_solvers:
        raise InvalidConfigurationError("size sweep needs at least one flow solver")
    if config.instance.bundle:
        raise InvalidConfigurationError("size sweep generates its instances; drop [instance] bundle")

    seeds = [{'n': n, 'm': m, 's': scaled_sparsity(config, n)} for n, m in config.nm_sweep]
    seeds += _trial_seeds(config, config.size_trials)
    directory, manifest = _start("size_sweep", out_dir, config, {}, seeds)

    rows, timing_rows = [], []
    means: Dict[str, List[Tuple[int, float]]] = {s: [] for s in config.flow_solvers}
    result = ExperimentResult("size_sweep", directory, manifest=manifest)
    for n, m in config.nm_sweep:
        s = scaled_sparsity(config, n)
        records = _run_trials(config, config.size_trials, (n, m, s))
        result.diverged_runs += sum(r.diverged for r in records)
        for solver, values in wallclock_summary(records).items():
            rows.append((n, m, s, solver, values['trials'], values['settled']))
            timing_rows.append((n, m, solver, values['min'], values['mean'], values['max']))
            means[solver].append((n, values['mean']))
            manifest.wall_clock[f"{n}x{m}/{solver}"] = values['mean']
        logger.info(f"Size point n={n} m={m} s={s} done")

    digest = manifest.digest
    result.files.append(write_csv(directory / "size_sweep.csv",
                                  ("n", "m", "s", "solver", "trials", "settled"), rows, digest))
    result.files.append(write_csv(directory / "size_sweep_timing.csv",
                                  ("n", "m", "solver", "min_s", "mean_s", "max_s"),
                                  timing_rows, digest))
    if config.svg:
        result.files.append(plots.plot_size_sweep(means, directory / "size_sweep.svg",
                                                  deterministic))
    result.summary = {'means': means}
    return _finish(result)


# ============================================================================
# STEP-SIZE SWEEP
# ============================================================================

def run_dt_sweep(config: ExperimentConfig, out_dir, deterministic: bool = True) -> ExperimentResult:
    """CAPPA error decay at every step size of the sweep, from the first start."""
    if not config.dt_sweep:
        raise InvalidConfigurationError("dt sweep needs at least one step size")
    bundle = load_instance(config)
    problem = prepare_problem(bundle.problem, config)
    x_ref = reference_solution(problem, config).x_ref
    settle_tol = settle_tolerance(x_ref, config)
    d, k = config.init_conditions[0] if config.init_conditions else (0, 0.0)
    x0 = initial_point(x_ref, d, k, problem.phi)

    directory, manifest = _start(
        "dt_sweep", out_dir, config, _header_constants(bundle, config),
        [{'instance_seed': config.instance.seed, 'direction_seed': d, 'norm_scale': k}])
    dynamics = make_dynamics("cappa", problem, config)
    for dt in config.dt_sweep:
        if dt > config.integrator.t_max:
            raise InvalidConfigurationError(f"dt={dt} exceeds t_max={config.integrator.t_max}")
    configs = [integrator_config(config, dt=dt, record_states=False) for dt in config.dt_sweep]
    outcomes = run_tasks(_flow_task, [(dynamics, x0, icfg, x_ref, settle_tol) for icfg in configs],
                         config.jobs)

    result = ExperimentResult("dt_sweep", directory, manifest=manifest)
    series_rows, final_rows, timing_rows, figure = [], [], [], []
    for dt, icfg, (traj, diverged) in zip(config.dt_sweep, configs, outcomes):
        for t, err, res in zip(traj.times, traj.error_to_ref, traj.residuals):
            series_rows.append((dt, t, err, res))
        final_rows.append((dt, traj.final_error, traj.settle_time, traj.steps_taken,
                           icfg.is_degenerate, diverged))
        timing_rows.append((dt, traj.wall_clock_seconds))
        manifest.wall_clock[repr(dt)] = traj.wall_clock_seconds
        figure.append((f"dt = {dt:g}", traj.times, traj.error_to_ref))
        result.diverged_runs += int(diverged)
        if icfg.is_degenerate:
            logger.warning(f"dt={dt} covers the horizon in a single step")

    digest = manifest.digest
    result.files.append(write_csv(directory / "dt_sweep.csv", ("dt", "t", "error", "residual"),
                                  series_rows, digest, manifest.constants))
    result.files.append(write_csv(
        directory / "dt_sweep_final.csv",
        ("dt", "final_error", "settle_time", "steps", "degenerate", "diverged"),
        final_rows, digest, {'settle_tol': repr(settle_tol)}))
    result.files.append(write_csv(directory / "dt_sweep_timing.csv", ("dt", "wall_clock_s"),
                                  timing_rows, digest))
    if config.svg:
        result.files.append(plots.plot_dt_sweep(figure, directory / "dt_sweep.svg",
                                                deterministic))
    result.summary = {
        'final_errors': {row[0]: row[1] for row in final_rows},
        'settle_times': {row[0]: row[2] for row in final_rows},
        'degenerate': {row[0]: row[4] for row in final_rows},
    }
    return _finish(result)


# ============================================================================
# SINGLE SOLVE
# ============================================================================

@dataclass
class SolveOutcome:
    solver: str
    x: np.ndarray
    kkt_residual: float
    path: Optional[Path] = None


def run_solve(config: ExperimentConfig, solver: str, out_dir) -> SolveOutcome:
    """
    Run one solver on the configured instance and write its terminal state.

    Flows start from the first init condition around the FISTA reference and
    run to t_max; a diverging flow raises DivergenceError.
    """
    bundle = load_instance(config)
    problem = prepare_problem(bundle.problem, config)
    directory = Path(out_dir) / "solve"

    if solver in ("fista", "ista"):
        solve = fista_solve if solver == "fista" else ista_solve
        solution = solve(problem, config.reference_tol, config.reference_max_iter,
                         config.support_tol)
        x = solution.x_ref
    else:
        x_ref = reference_solution(problem, config).x_ref
        d, k = config.init_conditions[0] if config.init_conditions else (0, 0.0)
        dynamics = make_dynamics(solver, problem, config)
        traj = integrate(dynamics, initial_point(x_ref, d, k, problem.phi),
                         integrator_config(config, record_states=False))
        x = dynamics.output(traj.final_state)

    kkt = kkt_residual(problem, x, config.support_tol)
    manifest = RunManifest(experiment=f"solve/{solver}", config=config.snapshot(),
                           seeds=[{'instance_seed': config.instance.seed}])
    path = write_csv(directory / f"{solver}.csv", ("index", "x"),
                     [(i, x[i]) for i in range(problem.n)], manifest.digest,
                     {'solver': solver, 'kkt_residual': repr(kkt)})
    manifest.write(directory / f"{solver}_manifest.json")
    logger.info(f"{solver}: kkt_residual={kkt:.3e}, support={len(support(x, config.support_tol))}")
    return SolveOutcome(solver=solver, x=x, kkt_residual=kkt, path=path)
