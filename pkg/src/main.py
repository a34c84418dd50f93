#!/usr/bin/env python3
"""
cappa-bench
Main entry point for the command line application

Subcommands reproduce the benchmark experiments (error decay, signal
recovery, wall-clock trials, size and step-size sweeps), report the theory
constants of an instance, generate instance files and run single solvers.
"""

import argparse
import os
import sys
from pathlib import Path

# NOTE: Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from config.experiment_config import ExperimentConfig, load_experiment_config  # noqa: E402
from config.settings import (  # noqa: E402
    APP_DESCRIPTION,
    APP_NAME,
    EXIT_CONFIG_ERROR,
    EXIT_DIVERGENCE,
    EXIT_FAILURE,
    EXIT_NON_CERTIFIED,
    EXIT_SUCCESS,
    OUTPUT_SETTINGS,
    SOLVER_NAMES,
    VERSION,
)
from src.harness import experiments  # noqa: E402
from src.problem.bundle_io import save_bundle  # noqa: E402
from src.problem.problem_model import generate_gaussian_instance  # noqa: E402
from src.utils.exceptions import (  # noqa: E402
    BundleIntegrityError,
    BundleParseError,
    CapacityError,
    CappaError,
    DivergenceError,
    InvalidArgumentError,
    InvalidConfigurationError,
    NonCertifiedConstantsError,
)
from src.utils.logger import get_logger, set_debug_mode, setup_logger  # noqa: E402

_CONFIG_ERRORS = (InvalidConfigurationError, InvalidArgumentError, BundleParseError,
                  BundleIntegrityError, CapacityError)

_EXPERIMENTS = {
    'fig-error-decay': experiments.run_error_decay,
    'fig-recovery': experiments.run_signal_recovery,
    'bench-trials': experiments.run_wallclock_trials,
    'bench-size': experiments.run_size_sweep,
    'bench-dt': experiments.run_dt_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="experiment file (INI)")
    common.add_argument('--seed', type=int, help="master and instance seed")
    common.add_argument('--jobs', type=int, help="worker processes for independent runs")
    common.add_argument('--out', help="output directory")
    common.add_argument('--deterministic', action=argparse.BooleanOptionalAction,
                        default=OUTPUT_SETTINGS['deterministic'],
                        help="strip timestamps from figures (default on)")
    common.add_argument('--verbose', action='store_true', help="debug output on the console")
    common.add_argument('--no-log-file', action='store_true', help="console logging only")

    parser = argparse.ArgumentParser(prog=APP_NAME, description=APP_DESCRIPTION)
    parser.add_argument('--version', action='version', version=f"{APP_NAME} {VERSION}")
    sub = parser.add_subparsers(dest='command', required=True)

    generate = sub.add_parser('generate', parents=[common], help="write an instance file")
    generate.add_argument('--output', help="bundle path (default <out>/instance.bin)")

    solve = sub.add_parser('solve', parents=[common], help="run one solver on the instance")
    solve.add_argument('--solver', choices=SOLVER_NAMES, default='cappa')

    for name, help_text in (('fig-error-decay', "error to x_ref over time"),
                            ('fig-recovery', "terminal CAPPA state against x_ref and x_true"),
                            ('bench-trials', "wall-clock over randomized trials"),
                            ('bench-size', "wall-clock over problem sizes"),
                            ('bench-dt', "CAPPA error decay over step sizes")):
        sub.add_parser(name, parents=[common], help=help_text)

    constants = sub.add_parser('constants', parents=[common], help="report theory constants")
    constants.add_argument('--budget', type=float, help="settling-time budget for gain scaling")
    constants.add_argument('--require-certified', action='store_true',
                           help="fail when delta_2s is a sampled bound")
    return parser


class CappaBenchApp:
    """Command line application: parses flags, loads the experiment and dispatches."""

    def __init__(self, argv=None):
        """Initialize the application."""
        self.args = build_parser().parse_args(argv)
        self.logger = get_logger(APP_NAME)
        self.config = None

    def setup_logging(self):
        """Setup application logging."""
        self.logger = setup_logger(APP_NAME, log_to_file=not self.args.no_log_file)
        if self.args.verbose:
            set_debug_mode(True)

    def load_config(self) -> ExperimentConfig:
        config = load_experiment_config(self.args.config)
        return config.with_overrides(seed=self.args.seed, jobs=self.args.jobs,
                                     output_dir=self.args.out)

    @property
    def out_dir(self) -> Path:
        return Path(self.config.output_dir)

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def cmd_generate(self) -> int:
        inst = self.config.instance
        bundle = generate_gaussian_instance(inst.n, inst.m, inst.s, inst.sigma, inst.lam, inst.seed)
        path = Path(self.args.output) if self.args.output else self.out_dir / "instance.bin"
        save_bundle(bundle, path)
        print(path)
        return EXIT_SUCCESS

    def cmd_solve(self) -> int:
        outcome = experiments.run_solve(self.config, self.args.solver, self.out_dir)
        print(f"{outcome.solver}: kkt_residual={outcome.kkt_residual:.6e} -> {outcome.path}")
        return EXIT_SUCCESS

    def cmd_constants(self) -> int:
        report = experiments.report_constants(self.config, self.args.budget)
        print(report.text())
        if self.args.require_certified and not report.certified:
            raise NonCertifiedConstantsError(
                f"delta_{report.moduli.order} came from {report.moduli.delta_source.value}")
        return EXIT_SUCCESS

    def cmd_experiment(self) -> int:
        result = _EXPERIMENTS[self.args.command](self.config, self.out_dir,
                                                 deterministic=self.args.deterministic)
        for path in result.files:
            print(path)
        if result.diverged_runs:
            self.logger.warning(f"{result.diverged_runs} runs diverged; see the diverged column")
            if self.args.command == 'fig-recovery':
                return EXIT_DIVERGENCE
        return EXIT_SUCCESS

    def run(self) -> int:
        """Main application entry point; returns the process exit code."""
        self.setup_logging()
        self.logger.info(f"{APP_NAME} {VERSION}: {self.args.command}")
        try:
            self.config = self.load_config()
            if self.args.command == 'generate':
                return self.cmd_generate()
            if self.args.command == 'solve':
                return self.cmd_solve()
            if self.args.command == 'constants':
                return self.cmd_constants()
            return self.cmd_experiment()
        except _CONFIG_ERRORS as e:
            self.logger.error(f"Configuration error: {e}")
            return EXIT_CONFIG_ERROR
        except DivergenceError as e:
            self.logger.error(f"Divergence: {e}")
            return EXIT_DIVERGENCE
        except NonCertifiedConstantsError as e:
            self.logger.error(f"Constants not certified: {e}")
            return EXIT_NON_CERTIFIED
        except CappaError as e:
            self.logger.error(f"{type(e).__name__}: {e}")
            return EXIT_FAILURE
        except KeyboardInterrupt:
            self.logger.info("Interrupted by user")
            return EXIT_FAILURE
        except Exception as e:
            self.logger.exception(f"Unexpected error: {e}")
            return EXIT_FAILURE


def main(argv=None):
    """Main function - entry point of the application."""
    sys.exit(CappaBenchApp(argv).run())


if __name__ == "__main__":
    main()
