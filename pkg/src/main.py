"""Main entry point for the Baer subplane laboratory."""
import sys
import os
import argparse
import logging
import time
import traceback
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Callable, List, Optional

# Add parent directory to path to allow imports when run as script
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.errors import BaerSaxlError, CacheError, CheckFailure, ConfigError
from src.field import make_field
from src.group import ActionCtx, build_action, cube_criterion_report
from src.lab import run_bounds, run_pair_lab
from src.models import (
    DEFAULT_JOBS, DEFAULT_Q_CAP, DEFAULT_SEED, DEFAULT_SYSTEMS, DEFAULT_TRIALS,
    GRAMS, SUBCOMMANDS, CheckResult, RunConfig, RunReport,
)
from src.polynomials import cubic_census, m_discriminant_check, run_systems, weil_campaign
from src.saxl import (
    Census, census_checks, construct_for_reps, equivariance_check, oracle_agreement,
    suborbit_census, verify_bg,
)
from src.storage import DEFAULT_DIR, ActionCache, ReportWriter

# Log directory and file
LOG_DIR = DEFAULT_DIR
LOG_FILE = LOG_DIR / "run.log"
MAX_LOG_SIZE = 1024 * 1024  # 1 MB
BACKUP_COUNT = 2  # Keep 2 backup files

# Transversal elements sampled for the Gamma_r equivariance check
EQUIVARIANCE_SAMPLES = 8

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class FileOnlyFilter(logging.Filter):
    """Keeps records marked file_only (tracebacks) off the console."""

    def filter(self, record: logging.LogRecord) -> bool:
        return not getattr(record, 'file_only', False)


def setup_logging(log_file: Path = LOG_FILE, level: int = logging.INFO) -> logging.Logger:
    """Log to a rotating file under ~/.baersaxl and progress to stderr."""
    log_file.parent.mkdir(parents=True, exist_ok=True, mode=0o700)

    handler = RotatingFileHandler(
        log_file,
        maxBytes=MAX_LOG_SIZE,
        backupCount=BACKUP_COUNT,
        encoding='utf-8'
    )
    handler.setFormatter(logging.Formatter(
        '%(asctime)s - %(levelname)s - %(message)s'
    ))

    # Set restrictive permissions on log file
    if log_file.exists():
        os.chmod(log_file, 0o600)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.addFilter(FileOnlyFilter())
    console.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))

    logger = logging.getLogger('baersaxl')
    logger.setLevel(min(level, logging.INFO))
    for old in list(logger.handlers):
        logger.removeHandler(old)
        old.close()
    logger.addHandler(handler)
    logger.addHandler(console)
    return logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='baersaxl',
        description='Exact PSU(3,q) computations on the orbit of Baer subplanes.',
    )
    parser.add_argument('command', choices=SUBCOMMANDS)
    size = parser.add_mutually_exclusive_group(required=True)
    size.add_argument('--q', type=int, help='field order q (an odd prime power)')
    size.add_argument('--p', type=int, help='characteristic p (with --m)')
    parser.add_argument('--m', type=int, default=1, help='exponent with q = p^m')
    parser.add_argument('--gram', choices=GRAMS, default='antidiag')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED)
    parser.add_argument('--trials', type=int, default=DEFAULT_TRIALS,
                        help='random pairs for the stabilizer oracle cross-check')
    parser.add_argument('--systems', type=int, default=DEFAULT_SYSTEMS,
                        help='random polynomial systems and Weil curves in lab5')
    parser.add_argument('--jobs', type=int, default=DEFAULT_JOBS)
    parser.add_argument('--cache', type=Path, help='binary cache of the enumerated orbit')
    parser.add_argument('--out', type=Path, help='JSON report path (summary goes to <out>.txt)')
    parser.add_argument('--max-reps', type=int, help='cap on suborbit representatives per stage')
    parser.add_argument('--q-cap', type=int, default=DEFAULT_Q_CAP)
    parser.add_argument('--log-file', type=Path, default=LOG_FILE)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--quiet', action='store_true')
    verbosity.add_argument('--verbose', action='store_true')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    options = dict(
        command=args.command, gram=args.gram, seed=args.seed, trials=args.trials,
        jobs=args.jobs, cache=args.cache, out=args.out, max_reps=args.max_reps,
        q_cap=args.q_cap, systems=args.systems,
    )
    if args.q is not None:
        config = RunConfig.for_q(args.q, **options)
    else:
        config = RunConfig(p=args.p, m=args.m, **options)
    return config.validate()


class Runner:
    """Runs the stages of one configuration and collects them into a RunReport."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.field = make_field(config.p, config.m)
        self.report = RunReport(config.analytic_dict())
        self._action: Optional[ActionCtx] = None
        self._census: Optional[Census] = None
        self.logger = logging.getLogger('baersaxl.main')

    def timed(self, name: str, fn: Callable):
        started = time.monotonic()
        result = fn()
        self.report.timings[name] = time.monotonic() - started
        return result

    @property
    def action(self) -> ActionCtx:
        if self._action is None:
            cfg = self.config
            cache = ActionCache(cfg.cache) if cfg.cache else None
            action = cache.load(self.field, cfg.gram) if cache else None
            if action is None:
                action = self.timed('orbit', lambda: build_action(self.field, cfg.gram))
                if cache and not cache.save(action):
                    self.logger.warning("could not write the action cache %s", cfg.cache)
            self._action = action
            self.report.context = action.to_dict()
        return self._action

    @property
    def census(self) -> Census:
        if self._census is None:
            self._census = self.timed('census', lambda: suborbit_census(self.action, self.config.jobs))
        return self._census

    def run_census(self) -> None:
        cfg = self.config
        census = self.census
        checks = census_checks(census, cfg.max_reps)
        checks.append(self.timed('oracle', lambda: oracle_agreement(self.action, cfg.trials, cfg.seed)))
        checks.append(equivariance_check(self.action, EQUIVARIANCE_SAMPLES, cfg.seed))
        cube = cube_criterion_report(self.action)
        checks.extend(cube.checks())
        self.report.add_section('census', census.to_dict())
        self.report.add_section('cube_criterion', cube.to_dict())
        self.report.add_checks(checks)

    def run_verify_bg(self) -> None:
        orbits = self._census.orbits if self._census else None
        bg = self.timed('bg', lambda: verify_bg(self.action, orbits, self.config.jobs, self.config.max_reps))
        self.report.add_section('bg', bg.to_dict())
        self.report.add_checks([bg.check()])

    def run_construct(self) -> None:
        witnesses, check = self.timed(
            'construct', lambda: construct_for_reps(self.census, self.config.jobs, self.config.max_reps))
        self.report.add_section('construct', [w.to_dict() for w in witnesses])
        self.report.add_checks([check])

    def run_bounds(self) -> None:
        section, checks = self.timed(
            'bounds', lambda: run_bounds(self.census, self.config.jobs, self.config.max_reps))
        self.report.add_section('bounds', section)
        self.report.add_checks(checks)

    def run_lab5(self) -> None:
        cfg = self.config
        section, checks = self.timed('pairs', lambda: run_pair_lab(self.census, cfg.jobs, cfg.max_reps))
        systems, system_checks = self.timed(
            'systems', lambda: run_systems(self.field, cfg.systems, cfg.seed, cfg.jobs))
        weil, weil_check = self.timed('weil', lambda: weil_campaign(self.field, cfg.systems, cfg.seed))
        section['systems'] = systems
        section['weil'] = weil
        checks = checks + system_checks + [weil_check, cubic_census(self.field), m_discriminant_check(self.field)]
        self.report.add_section('lab5', section)
        self.report.add_checks(checks)

    def stages(self) -> List[Callable[[], None]]:
        by_name = {
            'census': [self.run_census],
            'verify-bg': [self.run_verify_bg],
            'construct': [self.run_construct],
            'bounds': [self.run_bounds],
            'lab5': [self.run_lab5],
        }
        if self.config.command == 'all':
            return [stage for name in SUBCOMMANDS if name != 'all' for stage in by_name[name]]
        return by_name[self.config.command]

    def run(self) -> RunReport:
        for stage in self.stages():
            stage()
        return self.report


def first_failure(checks: List[CheckResult]) -> CheckFailure:
    check = checks[0]
    tags = ', '.join(c.tag for c in checks)
    return CheckFailure(check.tag, f"{check.violation_count} of {check.checked} cases violated "
                                   f"(failed checks: {tags})", {'violations': check.violations[:3]})


def run(config: RunConfig) -> RunReport:
    """Run one configuration, write its report and raise CheckFailure on a failed check."""
    report = Runner(config).run()
    if config.out is not None and not ReportWriter(config.out).save(report):
        raise BaerSaxlError(f"could not write the report to {config.out}")
    failed = report.failed_checks()
    if failed:
        raise first_failure(failed)
    return report


def main(argv: Optional[List[str]] = None) -> int:
    """Run the laboratory from the command line and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logger = setup_logging(args.log_file, level)

    try:
        config = config_from_args(args)
        report = run(config)
    except (ConfigError, CacheError) as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_CONFIG
    except CheckFailure as e:
        logger.error("check failed: %s", e)
        return EXIT_FAILED
    except KeyboardInterrupt:
        return EXIT_FAILED
    except Exception as e:
        error_msg = f"Run crashed: {e}\n{traceback.format_exc()}"
        logger.error(error_msg, extra={'file_only': True})
        print(f"Error: {e}", file=sys.stderr)
        print(f"Log written to: {args.log_file}", file=sys.stderr)
        return EXIT_FAILED

    for line in report.summary_lines():
        logger.info(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
