"""
Configuration settings for cappa-bench

This module contains all default parameters for the solvers, the flow
integrator, the theory constants and the benchmark harness.
Settings are organized by component and can be overridden by an experiment
file (see config/experiment_config.py) or by command line flags.
"""

from pathlib import Path

# Base directory paths
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"

# ============================================================================
# PROBLEM SETTINGS
# ============================================================================

PROBLEM_SETTINGS = {
    # Synthetic benchmark instance
    'n': 400,                         # Signal length N
    'm': 200,                         # Number of measurements M
    's': 20,                          # Nonzeros in the true signal
    'sigma': 0.016,                   # Noise standard deviation
    'lambda': 0.05,                   # l1 weight
    'seed': 7,                        # PCG64 seed of the instance
}

# ============================================================================
# PROX SETTINGS
# ============================================================================

PROX_SETTINGS = {
    'zero_tol': 1e-8,                 # Support detection in the KKT residual
    'use_gram': False,                # Cache Phi^T Phi for repeated flows
}

# ============================================================================
# DYNAMICS SETTINGS
# ============================================================================

CAPPA_SETTINGS = {
    'kappa1': 50.0,
    'kappa2': 50.0,
    'alpha1': 0.1,                    # Bound needs (1-eps(c), 1)
    'alpha2': 1.1,
    'eta': 0.4,
    'singular_tol': 1e-14,            # ||x - z(x)|| at or below this is an equilibrium
    'theory_variant': True,           # Also run CAPPA at an exponent inside (1-eps(c), 1)
    'theory_alpha1_fallback': 0.9,    # Used when the instance leaves no admissible eta
}

PDS_SETTINGS = {
    'eta': 0.4,
}

LCA_SETTINGS = {
    'tau': 1.0,                       # Time constant
    'threshold': None,                # None means "use lambda"
    'ft_exponent': 0.5,               # Finite-time variant only
    'monitor_eta': 0.4,               # Step used to report the fixed-point residual
    'singular_tol': 1e-14,
}

# ============================================================================
# INTEGRATOR SETTINGS
# ============================================================================

INTEGRATOR_SETTINGS = {
    'dt': 1e-3,                       # Benchmark step
    't_max': 1.0,                     # Flow horizon in seconds
    'stop_residual': 0.0,             # 0 runs to t_max
    'record_stride': 1,
    'scheme': 'euler',                # 'euler' or 'rk4'
    'settle_tol_rel': 1e-3,           # settle_tol = this * ||x_ref||
    'max_recorded_samples': 4000,     # Harness caps stride so series stay small
}

# ============================================================================
# ANALYSIS SETTINGS
# ============================================================================

ANALYSIS_SETTINGS = {
    'delta_mode': 'auto',             # 'exact', 'surrogate' or 'auto'
    'max_supports': 2_000_000,        # Brute-force enumeration guard
    'surrogate_samples': 20_000,      # Random supports for the lower bound
    'power_iteration_tol': 1e-10,
    'power_iteration_max_iter': 10_000,
    'chunk_size': 4096,               # Supports per batched eigen solve
}

# ============================================================================
# REFERENCE SOLVER SETTINGS
# ============================================================================

REFERENCE_SETTINGS = {
    'tol': 1e-12,                     # KKT residual target for x_ref
    'max_iter': 100_000,
}

# ============================================================================
# EXPERIMENT SETTINGS
# ============================================================================

EXPERIMENT_SETTINGS = {
    'solvers': ['cappa', 'pds', 'lca', 'ft_lca'],
    'init_conditions': [(1, 1.0), (2, 10.0), (3, 100.0), (4, 1000.0)],
    'trials': 100,
    'size_trials': 10,
    'dt_sweep': [1e-3, 1e-4, 1e-5],
    'nm_sweep': [(400, 200), (500, 250), (600, 300)],
    'preserve_ratio': True,           # Size sweep keeps N/M constant
    'master_seed': 2020,
    'support_tol': 1e-8,
    'jobs': 1,
}

# ============================================================================
# OUTPUT SETTINGS
# ============================================================================

OUTPUT_SETTINGS = {
    'output_dir': 'results',
    'svg': True,
    'deterministic': True,            # Strip timestamps from figures
    'csv_float_format': '.17g',       # Full f64 round trip
    'svg_hashsalt': 'cappa-bench',
}

# ============================================================================
# LOGGING SETTINGS
# ============================================================================

LOGGING_SETTINGS = {
    # Log file settings
    'log_dir': str(DATA_DIR / "logs"),
    'log_filename': 'cappa_bench.log',
    'error_log_filename': 'cappa_bench_errors.log',
    'max_log_size': 10 * 1024 * 1024,  # 10MB
    'backup_count': 5,

    # Logging levels
    'console_level': 'INFO',
    'file_level': 'DEBUG',

    # Log format
    'log_format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    'file_format': '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
    'date_format': '%Y-%m-%d %H:%M:%S',
}

# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

_CATEGORIES = {
    'problem': PROBLEM_SETTINGS,
    'prox': PROX_SETTINGS,
    'cappa': CAPPA_SETTINGS,
    'pds': PDS_SETTINGS,
    'lca': LCA_SETTINGS,
    'integrator': INTEGRATOR_SETTINGS,
    'analysis': ANALYSIS_SETTINGS,
    'reference': REFERENCE_SETTINGS,
    'experiment': EXPERIMENT_SETTINGS,
    'output': OUTPUT_SETTINGS,
    'logging': LOGGING_SETTINGS,
}


def get_setting(category, key, default=None):
    """Get a setting value from the specified category."""
    if category in _CATEGORIES:
        return _CATEGORIES[category].get(key, default)
    return default


def validate_settings():
    """Validate all settings for consistency and correctness."""
    errors = []

    p = PROBLEM_SETTINGS
    if not (p['s'] <= p['m'] < p['n']):
        errors.append("Problem dimensions must satisfy s <= m < n")
    if p['lambda'] <= 0:
        errors.append("lambda must be positive")
    if p['sigma'] < 0:
        errors.append("sigma must be nonnegative")

    c = CAPPA_SETTINGS
    if not (0 < c['alpha1'] < 1):
        errors.append("CAPPA alpha1 must lie in (0, 1)")
    if not (0 < c['theory_alpha1_fallback'] < 1):
        errors.append("CAPPA theory_alpha1_fallback must lie in (0, 1)")
    if c['alpha2'] <= 1:
        errors.append("CAPPA alpha2 must exceed 1")
    if min(c['kappa1'], c['kappa2'], c['eta']) <= 0:
        errors.append("CAPPA kappa1, kappa2 and eta must be positive")

    i = INTEGRATOR_SETTINGS
    if not (0 < i['dt'] <= i['t_max']):
        errors.append("Integrator needs 0 < dt <= t_max")
    if i['record_stride'] < 1:
        errors.append("record_stride must be at least 1")
    if i['scheme'] not in ('euler', 'rk4'):
        errors.append("scheme must be 'euler' or 'rk4'")

    if ANALYSIS_SETTINGS['delta_mode'] not in ('exact', 'surrogate', 'auto'):
        errors.append("delta_mode must be 'exact', 'surrogate' or 'auto'")

    if EXPERIMENT_SETTINGS['trials'] < 1:
        errors.append("trials must be at least 1")

    return errors


# ============================================================================
# CONSTANTS
# ============================================================================

# Version information
VERSION = "1.0.0"
APP_NAME = "cappa-bench"
APP_DESCRIPTION = "Fixed-time proximal flows for l1-regularized sparse recovery"

# Exit codes
EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGENCE = 3
EXIT_NON_CERTIFIED = 4

SOLVER_NAMES = ('cappa', 'pds', 'lca', 'ft_lca', 'fista', 'ista')
FLOW_SOLVERS = ('cappa', 'pds', 'lca', 'ft_lca')

if __name__ == "__main__":
    print(f"{APP_NAME} v{VERSION}")
    print(f"Log Directory: {LOGGING_SETTINGS['log_dir']}")

    errors = validate_settings()
    if errors:
        print("\nSettings validation errors:")
        for error in errors:
            print(f"  - {error}")
    else:
        print("\nAll settings are valid.")
