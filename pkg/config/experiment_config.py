"""
Experiment file loading for cappa-bench

An experiment file is an INI document whose sections mirror ExperimentConfig:

    [instance]     n, m, s, sigma, lambda, seed, bundle
    [solvers]      names
    [cappa]        kappa1, kappa2, alpha1, alpha2, eta, use_gram, theory_variant
    [pds]          eta
    [lca]          tau, threshold, ft_exponent, monitor_eta
    [integrator]   dt, t_max, stop_residual, record_stride, scheme, settle_tol_rel
    [experiment]   init_conditions, trials, size_trials, dt_sweep, nm_sweep,
                   preserve_ratio, master_seed, support_tol, jobs
    [reference]    tol, max_iter
    [analysis]     delta_mode, surrogate_samples, max_supports
    [output]       output_dir, svg

Missing keys fall back to config/settings.py. Unknown sections or keys are
errors. Lists are comma separated; init conditions are "seed:scale" pairs and
sizes are "NxM" pairs.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from config.settings import (
    ANALYSIS_SETTINGS,
    CAPPA_SETTINGS,
    EXPERIMENT_SETTINGS,
    FLOW_SOLVERS,
    INTEGRATOR_SETTINGS,
    LCA_SETTINGS,
    OUTPUT_SETTINGS,
    PDS_SETTINGS,
    PROBLEM_SETTINGS,
    PROX_SETTINGS,
    REFERENCE_SETTINGS,
    SOLVER_NAMES,
)
from src.utils.exceptions import CappaError, InvalidConfigurationError

# ============================================================================
# CONFIG TYPES
# ============================================================================


@dataclass(frozen=True)
class InstanceConfig:
    n: int = PROBLEM_SETTINGS['n']
    m: int = PROBLEM_SETTINGS['m']
    s: int = PROBLEM_SETTINGS['s']
    sigma: float = PROBLEM_SETTINGS['sigma']
    lam: float = PROBLEM_SETTINGS['lambda']
    seed: int = PROBLEM_SETTINGS['seed']
    bundle: Optional[str] = None


@dataclass(frozen=True)
class CappaConfig:
    kappa1: float = CAPPA_SETTINGS['kappa1']
    kappa2: float = CAPPA_SETTINGS['kappa2']
    alpha1: float = CAPPA_SETTINGS['alpha1']
    alpha2: float = CAPPA_SETTINGS['alpha2']
    eta: float = CAPPA_SETTINGS['eta']
    use_gram: bool = PROX_SETTINGS['use_gram']
    theory_variant: bool = CAPPA_SETTINGS['theory_variant']


@dataclass(frozen=True)
class LcaConfig:
    tau: float = LCA_SETTINGS['tau']
    threshold: Optional[float] = LCA_SETTINGS['threshold']
    ft_exponent: float = LCA_SETTINGS['ft_exponent']
    monitor_eta: float = LCA_SETTINGS['monitor_eta']


@dataclass(frozen=True)
class IntegratorSection:
    dt: float = INTEGRATOR_SETTINGS['dt']
    t_max: float = INTEGRATOR_SETTINGS['t_max']
    stop_residual: float = INTEGRATOR_SETTINGS['stop_residual']
    record_stride: int = INTEGRATOR_SETTINGS['record_stride']
    scheme: str = INTEGRATOR_SETTINGS['scheme']
    settle_tol_rel: float = INTEGRATOR_SETTINGS['settle_tol_rel']


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one harness run needs; a snapshot of it goes into the manifest."""

    instance: InstanceConfig = field(default_factory=InstanceConfig)
    solvers: Tuple[str, ...] = tuple(EXPERIMENT_SETTINGS['solvers'])
    cappa: CappaConfig = field(default_factory=CappaConfig)
    pds_eta: float = PDS_SETTINGS['eta']
    lca: LcaConfig = field(default_factory=LcaConfig)
    integrator: IntegratorSection = field(default_factory=IntegratorSection)
    init_conditions: Tuple[Tuple[int, float], ...] = tuple(EXPERIMENT_SETTINGS['init_conditions'])
    trials: int = EXPERIMENT_SETTINGS['trials']
    size_trials: int = EXPERIMENT_SETTINGS['size_trials']
    dt_sweep: Tuple[float, ...] = tuple(EXPERIMENT_SETTINGS['dt_sweep'])
    nm_sweep: Tuple[Tuple[int, int], ...] = tuple(EXPERIMENT_SETTINGS['nm_sweep'])
    preserve_ratio: bool = EXPERIMENT_SETTINGS['preserve_ratio']
    master_seed: int = EXPERIMENT_SETTINGS['master_seed']
    support_tol: float = EXPERIMENT_SETTINGS['support_tol']
    jobs: int = EXPERIMENT_SETTINGS['jobs']
    reference_tol: float = REFERENCE_SETTINGS['tol']
    reference_max_iter: int = REFERENCE_SETTINGS['max_iter']
    delta_mode: str = ANALYSIS_SETTINGS['delta_mode']
    surrogate_samples: int = ANALYSIS_SETTINGS['surrogate_samples']
    max_supports: int = ANALYSIS_SETTINGS['max_supports']
    output_dir: str = OUTPUT_SETTINGS['output_dir']
    svg: bool = OUTPUT_SETTINGS['svg']

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise InvalidConfigurationError("; ".join(errors))

    def validate(self) -> List[str]:
        """Consistency checks; returns a list of problems, empty when valid."""
        errors = []
        unknown = [name for name in self.solvers if name not in SOLVER_NAMES]
        if unknown:
            errors.append(f"unknown solvers: {', '.join(unknown)}")
        if not self.solvers:
            errors.append("at least one solver is required")
        if self.trials < 1 or self.size_trials < 1:
            errors.append("trials and size_trials must be at least 1")
        if any(not dt > 0 for dt in self.dt_sweep):
            errors.append("dt_sweep values must be positive")
        if any(scale < 0 for _, scale in self.init_conditions):
            errors.append("init condition scales must be nonnegative")
        if self.preserve_ratio and len(self.nm_sweep) > 1:
            n0, m0 = self.nm_sweep[0]
            if any(n * m0 != n0 * m for n, m in self.nm_sweep):
                errors.append("nm_sweep must keep a constant N/M ratio when preserve_ratio is set")
        if self.delta_mode not in ('exact', 'surrogate', 'auto'):
            errors.append("delta_mode must be 'exact', 'surrogate' or 'auto'")
        if self.integrator.scheme not in ('euler', 'rk4'):
            errors.append("scheme must be 'euler' or 'rk4'")
        if not 0 < self.integrator.dt <= self.integrator.t_max:
            errors.append("integrator needs 0 < dt <= t_max")
        if self.jobs < 1:
            errors.append("jobs must be at least 1")
        return errors

    @property
    def flow_solvers(self) -> Tuple[str, ...]:
        return tuple(name for name in self.solvers if name in FLOW_SOLVERS)

    def with_overrides(self, seed: Optional[int] = None, jobs: Optional[int] = None,
                       output_dir: Optional[str] = None) -> "ExperimentConfig":
        """Apply command line overrides; None leaves a value unchanged.

        A seed replaces both the instance seed and the master seed.
        """
        changes: Dict[str, Any] = {}
        if seed is not None:
            changes['master_seed'] = int(seed)
            changes['instance'] = replace(self.instance, seed=int(seed))
        if jobs is not None:
            changes['jobs'] = int(jobs)
        if output_dir is not None:
            changes['output_dir'] = str(output_dir)
        return replace(self, **changes) if changes else self

    def snapshot(self) -> Dict[str, Any]:
        """JSON-ready view with lists in place of tuples.

        jobs and output_dir do not change results and stay out of the snapshot.
        """
        data = asdict(self)
        data.pop('jobs')
        data.pop('output_dir')
        data['solvers'] = list(self.solvers)
        data['init_conditions'] = [list(pair) for pair in self.init_conditions]
        data['dt_sweep'] = list(self.dt_sweep)
        data['nm_sweep'] = [list(pair) for pair in self.nm_sweep]
        return data


# ============================================================================
# INI PARSING
# ============================================================================

def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"not a boolean: '{text}'")


def _split(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def _parse_init_conditions(text: str) -> Tuple[Tuple[int, float], ...]:
    pairs = []
    for item in _split(text):
        seed, _, scale = item.partition(':')
        if not scale:
            raise ValueError(f"init condition '{item}' is not 'seed:scale'")
        pairs.append((int(seed), float(scale)))
    return tuple(pairs)


def _parse_sizes(text: str) -> Tuple[Tuple[int, int], ...]:
    pairs = []
    for item in _split(text):
        n, _, m = item.lower().partition('x')
        if not m:
            raise ValueError(f"size '{item}' is not 'NxM'")
        pairs.append((int(n), int(m)))
    return tuple(pairs)


def _parse_optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ('', 'none') else float(text)


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in _split(text))


# section -> key -> (target field, parser). A dotted target names a nested section.
_SCHEMA: Dict[str, Dict[str, Tuple[str, Callable[[str], Any]]]] = {
    'instance': {
        'n': ('instance.n', int),
        'm': ('instance.m', int),
        's': ('instance.s', int),
        'sigma': ('instance.sigma', float),
        'lambda': ('instance.lam', float),
        'seed': ('instance.seed', int),
        'bundle': ('instance.bundle', str),
    },
    'solvers': {
        'names': ('solvers', lambda text: tuple(_split(text))),
    },
    'cappa': {
        'kappa1': ('cappa.kappa1', float),
        'kappa2': ('cappa.kappa2', float),
        'alpha1': ('cappa.alpha1', float),
        'alpha2': ('cappa.alpha2', float),
        'eta': ('cappa.eta', float),
        'use_gram': ('cappa.use_gram', _parse_bool),
        'theory_variant': ('cappa.theory_variant', _parse_bool),
    },
    'pds': {
        'eta': ('pds_eta', float),
    },
    'lca': {
        'tau': ('lca.tau', float),
        'threshold': ('lca.threshold', _parse_optional_float),
        'ft_exponent': ('lca.ft_exponent', float),
        'monitor_eta': ('lca.monitor_eta', float),
    },
    'integrator': {
        'dt': ('integrator.dt', float),
        't_max': ('integrator.t_max', float),
        'stop_residual': ('integrator.stop_residual', float),
        'record_stride': ('integrator.record_stride', int),
        'scheme': ('integrator.scheme', str),
        'settle_tol_rel': ('integrator.settle_tol_rel', float),
    },
    'experiment': {
        'init_conditions': ('init_conditions', _parse_init_conditions),
        'trials': ('trials', int),
        'size_trials': ('size_trials', int),
        'dt_sweep': ('dt_sweep', _float_list),
        'nm_sweep': ('nm_sweep', _parse_sizes),
        'preserve_ratio': ('preserve_ratio', _parse_bool),
        'master_seed': ('master_seed', int),
        'support_tol': ('support_tol', float),
        'jobs': ('jobs', int),
    },
    'reference': {
        'tol': ('reference_tol', float),
        'max_iter': ('reference_max_iter', int),
    },
    'analysis': {
        'delta_mode': ('delta_mode', str),
        'surrogate_samples': ('surrogate_samples', int),
        'max_supports': ('max_supports', int),
    },
    'output': {
        'output_dir': ('output_dir', str),
        'svg': ('svg', _parse_bool),
    },
}

_NESTED = {
    'instance': InstanceConfig,
    'cappa': CappaConfig,
    'lca': LcaConfig,
    'integrator': IntegratorSection,
}


def parse_experiment_text(text: str, source: str = "<string>") -> ExperimentConfig:
    """Build an ExperimentConfig from INI text."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise InvalidConfigurationError(f"{source}: {e}") from e

    flat: Dict[str, Any] = {}
    nested: Dict[str, Dict[str, Any]] = {name: {} for name in _NESTED}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise InvalidConfigurationError(f"{source}: unknown section [{section}]")
        keys = _SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in keys:
                raise InvalidConfigurationError(f"{source}: unknown key '{key}' in [{section}]")
            target, convert = keys[key]
            try:
                value = convert(raw)
            except ValueError as e:
                raise InvalidConfigurationError(f"{source}: [{section}] {key}: {e}") from e
            head, _, tail = target.partition('.')
            if tail:
                nested[head][tail] = value
            else:
                flat[target] = value

    try:
        for name, cls in _NESTED.items():
            flat[name] = cls(**nested[name])
        return ExperimentConfig(**flat)
    except CappaError as e:
        raise InvalidConfigurationError(f"{source}: {e}") from e


def load_experiment_config(path=None) -> ExperimentConfig:
    """Read an experiment file; with no path the defaults are returned."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidConfigurationError(f"cannot read experiment file {path}: {e}") from e
    return parse_experiment_text(text, source=str(path))
