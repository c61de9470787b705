"""Run configuration and report records."""
from pathlib import Path
from typing import Any, Dict, List, Optional

from sympy import factorint

from .errors import ConfigError
from .field import MIN_Q

# Desk-scale limits
DEFAULT_Q_CAP = 13
MAX_PACKED_ORDER = 1024

DEFAULT_SEED = 20240601
DEFAULT_TRIALS = 10000
DEFAULT_SYSTEMS = 200
DEFAULT_JOBS = 1

SUBCOMMANDS = ['census', 'verify-bg', 'construct', 'bounds', 'lab5', 'all']
GRAMS = ['antidiag', 'identity']

# Report schema version, bumped on incompatible changes
REPORT_VERSION = 1


def split_prime_power(q: int) -> Optional[tuple]:
    """(p, m) with q = p^m, or None when q is not a prime power."""
    if q < 2:
        return None
    factors = factorint(q)
    if len(factors) != 1:
        return None
    (p, m), = factors.items()
    return int(p), int(m)


class RunConfig:
    """Everything one invocation needs; validated before any context is built."""

    def __init__(
        self,
        p: int,
        m: int = 1,
        command: str = 'census',
        gram: str = 'antidiag',
        seed: int = DEFAULT_SEED,
        trials: int = DEFAULT_TRIALS,
        jobs: int = DEFAULT_JOBS,
        cache: Optional[Path] = None,
        out: Optional[Path] = None,
        max_reps: Optional[int] = None,
        q_cap: int = DEFAULT_Q_CAP,
        systems: int = DEFAULT_SYSTEMS,
    ):
        self.p = p
        self.m = m
        self.command = command
        self.gram = gram
        self.seed = seed
        self.trials = trials
        self.jobs = jobs
        self.cache = Path(cache) if cache is not None else None
        self.out = Path(out) if out is not None else None
        self.max_reps = max_reps
        self.q_cap = q_cap
        self.systems = systems

    @property
    def q(self) -> int:
        return self.p ** self.m

    @classmethod
    def for_q(cls, q: int, **kwargs) -> 'RunConfig':
        pm = split_prime_power(q)
        if pm is None:
            raise ConfigError(f"q = {q} is not a prime power")
        return cls(p=pm[0], m=pm[1], **kwargs)

    def validate(self) -> 'RunConfig':
        """Raise ConfigError when the configuration cannot be run."""
        if self.m < 1 or split_prime_power(self.p) != (self.p, 1):
            raise ConfigError(f"p = {self.p} is not a prime")
        if self.p == 2:
            raise ConfigError("q must be odd")
        if self.q < MIN_Q:
            raise ConfigError(f"q must be at least {MIN_Q}, got {self.q}")
        if self.q > self.q_cap:
            raise ConfigError(f"q = {self.q} exceeds the cap {self.q_cap} (raise it with --q-cap)")
        if self.q * self.q >= MAX_PACKED_ORDER:
            raise ConfigError(f"q = {self.q} is beyond the supported range")
        if self.command not in SUBCOMMANDS:
            raise ConfigError(f"unknown command: {self.command}")
        if self.gram not in GRAMS:
            raise ConfigError(f"unknown Gram model: {self.gram}")
        if self.command == 'construct' and self.gram != 'antidiag':
            raise ConfigError("construct needs the anti-diagonal Gram model")
        if self.trials < 0 or self.systems < 0:
            raise ConfigError("trial and system counts must be non-negative")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.max_reps is not None and self.max_reps < 1:
            raise ConfigError("max-reps must be positive")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'p': self.p,
            'm': self.m,
            'q': self.q,
            'command': self.command,
            'gram': self.gram,
            'seed': self.seed,
            'trials': self.trials,
            'jobs': self.jobs,
            'cache': str(self.cache) if self.cache else None,
            'out': str(self.out) if self.out else None,
            'max_reps': self.max_reps,
            'q_cap': self.q_cap,
            'systems': self.systems,
        }

    def analytic_dict(self) -> Dict[str, Any]:
        """The fields that determine report content (jobs and paths do not)."""
        data = self.to_dict()
        for key in ('jobs', 'cache', 'out'):
            data.pop(key)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        return cls(
            p=data['p'],
            m=data.get('m', 1),
            command=data.get('command', 'census'),
            gram=data.get('gram', 'antidiag'),
            seed=data.get('seed', DEFAULT_SEED),
            trials=data.get('trials', DEFAULT_TRIALS),
            jobs=data.get('jobs', DEFAULT_JOBS),
            cache=data.get('cache'),
            out=data.get('out'),
            max_reps=data.get('max_reps'),
            q_cap=data.get('q_cap', DEFAULT_Q_CAP),
            systems=data.get('systems', DEFAULT_SYSTEMS),
        )

    def __repr__(self) -> str:
        return f"RunConfig(q={self.q}, command={self.command}, gram={self.gram}, seed={self.seed})"


class CheckResult:
    """
    Tally of one verified property.

    Asserted checks decide the exit status; report-only checks (asymptotic
    bounds outside their hypothesis) are recorded but never fail a run.
    """

    MAX_RECORDED = 20

    def __init__(self, tag: str, asserted: bool = True, note: str = "",
                 checked: int = 0, violations: Optional[List[Dict[str, Any]]] = None,
                 violation_count: Optional[int] = None):
        self.tag = tag
        self.asserted = asserted
        self.note = note
        self.checked = checked
        self.violations = violations or []
        self.violation_count = len(self.violations) if violation_count is None else violation_count

    def record(self, ok: bool, **data) -> bool:
        """Count one case; keep the first few failures with their data."""
        self.checked += 1
        if not ok:
            self.violation_count += 1
            if len(self.violations) < self.MAX_RECORDED:
                self.violations.append(data)
        return ok

    def merge(self, other: 'CheckResult') -> 'CheckResult':
        self.checked += other.checked
        self.violation_count += other.violation_count
        room = self.MAX_RECORDED - len(self.violations)
        self.violations.extend(other.violations[:max(room, 0)])
        return self

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    @property
    def failed(self) -> bool:
        return self.asserted and not self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tag': self.tag,
            'asserted': self.asserted,
            'note': self.note,
            'checked': self.checked,
            'violation_count': self.violation_count,
            'violations': self.violations,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CheckResult':
        return cls(
            tag=data['tag'],
            asserted=data.get('asserted', True),
            note=data.get('note', ''),
            checked=data.get('checked', 0),
            violations=data.get('violations', []),
            violation_count=data.get('violation_count'),
        )

    def __repr__(self) -> str:
        state = 'ok' if self.passed else f'{self.violation_count} violations'
        return f"CheckResult({self.tag}: {self.checked} checked, {state})"


class RunReport:
    """The JSON document written for one run: context, sections, checks and timings."""

    def __init__(self, config: Dict[str, Any], context: Optional[Dict[str, Any]] = None):
        self.config = config
        self.context = context or {}
        self.sections: Dict[str, Any] = {}
        self.checks: List[CheckResult] = []
        self.timings: Dict[str, float] = {}

    def add_section(self, name: str, data: Any) -> None:
        self.sections[name] = data

    def add_checks(self, checks: List[CheckResult]) -> None:
        self.checks.extend(checks)

    def failed_checks(self) -> List[CheckResult]:
        return [c for c in self.checks if c.failed]

    @property
    def passed(self) -> bool:
        return not self.failed_checks()

    def to_dict(self, include_timings: bool = True) -> Dict[str, Any]:
        data = {
            'version': REPORT_VERSION,
            'config': self.config,
            'context': self.context,
            'sections': self.sections,
            'checks': [c.to_dict() for c in self.checks],
            'passed': self.passed,
        }
        if include_timings:
            data['timings'] = {k: round(v, 3) for k, v in self.timings.items()}
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunReport':
        report = cls(data.get('config', {}), data.get('context', {}))
        report.sections = data.get('sections', {})
        report.checks = [CheckResult.from_dict(c) for c in data.get('checks', [])]
        report.timings = data.get('timings', {})
        return report

    def summary_lines(self) -> List[str]:
        """Plain-text summary written next to the JSON report."""
        cfg = self.config
        lines = [f"baer-saxl report: q={cfg.get('q')} command={cfg.get('command')} "
                 f"gram={cfg.get('gram')} seed={cfg.get('seed')}"]
        for key in sorted(self.context):
            lines.append(f"  {key}: {self.context[key]}")
        for check in self.checks:
            mark = 'PASS' if check.passed else ('FAIL' if check.asserted else 'NOTE')
            lines.append(f"[{mark}] {check.tag}: {check.checked} checked, "
                         f"{check.violation_count} violations"
                         + (f" ({check.note})" if check.note else ""))
        lines.append('result: ' + ('ok' if self.passed else 'FAILED'))
        return lines

    def __repr__(self) -> str:
        return f"RunReport(sections={sorted(self.sections)}, checks={len(self.checks)})"
