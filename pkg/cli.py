# -*- coding: utf-8 -*-
"""
cli - command-line entry point for the EBI certification toolkit

    python cli.py --command certify --source builtin-reference
    python cli.py --command certify --source werner --v 0.5 --out werner.txt
    python cli.py --command sweep --jobs 4 --out sweep.txt
    python cli.py --command bruteforce
    python cli.py --command seesaw --seed 7 --max-rounds 500
    python cli.py --command sample --source builtin-reference --shots 100000 --seed 1 --out ref.counts
    python cli.py --command report --log 'ebi_cert*.jsonl'

Precedence: defaults < --config file (flat `key = value`) < flags.
Exit status is 0 whenever the computation ran, whatever the verdict;
2 for configuration or input errors, 3 for I/O failures.
"""
import os
import sys
import io
import argparse
from dataclasses import dataclass, fields
from datetime import datetime
from typing import List, Optional, Sequence, Tuple

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'reports'))

from adversary import classical_guess_prob, four_lambda_attack
from attack_sweep import FAMILIES, attack_sweep, format_sweep_table, theorem_violations
from certifier import CertTolerances, Certifier, MissingStatistics
from ebi import QUANTUM_MAX, classical_max_bruteforce, reference_strategy, werner_strategy
from make_report import DEFAULT_LOG_PATTERN, generate_report, write_atomic
from optimizer import SeesawConfig, seesaw_maximize
from scenario import (Behavior, CountsFormatError, EmptyRecord, Strategy, behavior_of,
                      estimate, format_counts, read_counts, sample)

REPORT_VERSION = "ebi-report v1"

COMMANDS = ('certify', 'sweep', 'bruteforce', 'seesaw', 'sample', 'report')
SOURCES = ('builtin-reference', 'counts-file', 'werner', 'classical')
SWEEP_FAMILIES = tuple(FAMILIES) + ('all',)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


class ConfigError(ValueError):
    """Invalid configuration; `field` names the offending setting"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class RunConfig:
    command: str = 'certify'
    source: str = 'builtin-reference'
    counts: Optional[str] = None
    v: Optional[float] = None
    q: Optional[float] = None
    family: str = 'all'
    shots: Optional[int] = None
    seed: int = 0
    s_tol: float = 1e-9
    uniform_tol: float = 1e-9
    det_tol: float = 1e-9
    rank_tol: float = 1e-6
    trace_min: float = 1e-6
    jobs: int = 1
    max_rounds: int = 10_000
    log: str = DEFAULT_LOG_PATTERN
    out: str = '-'

    def validate(self) -> 'RunConfig':
        if self.command not in COMMANDS:
            raise ConfigError('command', f"must be one of {', '.join(COMMANDS)}, got {self.command!r}")
        if self.source not in SOURCES:
            raise ConfigError('source', f"must be one of {', '.join(SOURCES)}, got {self.source!r}")
        if self.source == 'counts-file' and not self.counts:
            raise ConfigError('counts', "a counts file path is required with --source counts-file")
        if self.source != 'counts-file' and self.counts:
            raise ConfigError('counts', f"only valid with --source counts-file, got source {self.source!r}")
        if self.family not in SWEEP_FAMILIES:
            raise ConfigError('family', f"must be one of {', '.join(SWEEP_FAMILIES)}, got {self.family!r}")
        for name, owner in (('v', 'werner'), ('q', 'classical')):
            value = getattr(self, name)
            if value is None:
                continue
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must be in [0, 1], got {value}")
            if self.source != owner:
                raise ConfigError(name, f"only valid with --source {owner}, got source {self.source!r}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError('shots', f"must be >= 1, got {self.shots}")
        if self.command == 'sample' and self.shots is None:
            raise ConfigError('shots', "required by the sample command")
        if self.command == 'sample' and self.source in ('counts-file', 'classical'):
            raise ConfigError('source', f"sample needs a quantum strategy, got {self.source!r}")
        for name in ('s_tol', 'uniform_tol', 'det_tol', 'rank_tol', 'trace_min'):
            value = getattr(self, name)
            if not value > 0.0:
                raise ConfigError(name, f"must be positive, got {value}")
        if self.jobs < 1:
            raise ConfigError('jobs', f"must be >= 1, got {self.jobs}")
        if self.max_rounds < 1:
            raise ConfigError('max_rounds', f"must be >= 1, got {self.max_rounds}")
        return self

    @property
    def visibility(self) -> float:
        return 1.0 if self.v is None else self.v

    @property
    def attack_q(self) -> float:
        return 1.0 if self.q is None else self.q

    def tolerances(self) -> CertTolerances:
        return CertTolerances(s_tol=self.s_tol, uniform_tol=self.uniform_tol, det_zero=self.det_tol,
                              trace_min=self.trace_min, rank_min=self.rank_tol)

    def source_label(self) -> str:
        if self.source == 'counts-file':
            return f"counts-file({self.counts})"
        if self.source == 'werner':
            return f"werner(v={self.visibility:g})"
        if self.source == 'classical':
            return f"classical(q={self.attack_q:g})"
        return self.source


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in (int, Optional[int]):
            return int(raw)
        if kind in (float, Optional[float]):
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    return raw


def load_config_file(path: str) -> dict:
    """Flat `key = value` lines; '#' starts a comment; keys are flag names without dashes"""
    values = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError('config', f"line {lineno}: expected key = value")
            key, raw = (part.strip() for part in line.split('=', 1))
            key = key.replace('-', '_')
            if key not in _FIELD_TYPES:
                raise ConfigError(key, f"unknown setting (config line {lineno})")
            values[key] = _coerce(key, raw)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Elegant Bell inequality randomness certification')
    parser.add_argument('--config', help='Flat key = value config file; flags override it')
    parser.add_argument('--command', choices=COMMANDS,
                        help='certify (default), sweep, bruteforce, seesaw, sample, or report')
    parser.add_argument('--source', choices=SOURCES,
                        help='Behavior source for certify/sample (default builtin-reference)')
    parser.add_argument('--counts', help='Counts file for --source counts-file')
    parser.add_argument('--v', type=float, help='Werner visibility in [0, 1]')
    parser.add_argument('--q', type=float, help='Classical attack: probability Eve knows the outcome')
    parser.add_argument('--family', choices=SWEEP_FAMILIES, help='Attack family for sweep (default all)')
    parser.add_argument('--shots', type=int, help='Shots per setting pair; certify samples when set')
    parser.add_argument('--seed', type=int, help='Sampling / seesaw seed')
    parser.add_argument('--s-tol', dest='s_tol', type=float, help='Test 1 tolerance on |S - 4√3|')
    parser.add_argument('--uniform-tol', dest='uniform_tol', type=float, help='Tolerance on |P(a|A_4) - 1/4|')
    parser.add_argument('--det-tol', dest='det_tol', type=float, help='Determinant-identity tolerance')
    parser.add_argument('--rank-tol', dest='rank_tol', type=float, help='Minimum singular value')
    parser.add_argument('--trace-min', dest='trace_min', type=float, help='Minimum tr Q_a')
    parser.add_argument('--jobs', type=int, help='Worker processes for sweep rows')
    parser.add_argument('--max-rounds', dest='max_rounds', type=int, help='Seesaw round cap')
    parser.add_argument('--log', help='Glob of JSONL certification logs for the report command')
    parser.add_argument('--out', help="Report path; '-' writes to stdout (default)")
    return parser


def resolve_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values.update(load_config_file(args.config))
        except OSError as e:
            raise ConfigError('config', f"cannot read {args.config}: {e}") from e
    values.update({k: v for k, v in vars(args).items() if k != 'config' and v is not None})
    return RunConfig(**values).validate()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_report(pairs: Sequence[Tuple[str, object]], table: Optional[str] = None,
                  generated: Optional[str] = None) -> str:
    """Versioned header, `key: value` lines, then an optional delimited table"""
    generated = generated or datetime.now().isoformat()
    lines = [f"# {REPORT_VERSION} generated={generated}"]
    lines += [f"{key}: {_format_value(value)}" for key, value in pairs]
    text = "\n".join(lines) + "\n"
    if table:
        text += "\n" + table
    return text


def emit(cfg: RunConfig, text: str):
    if cfg.out == '-':
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def source_strategy(cfg: RunConfig) -> Strategy:
    if cfg.source == 'werner':
        return werner_strategy(cfg.visibility)
    return reference_strategy()


def source_behavior(cfg: RunConfig) -> Tuple[Behavior, List[Tuple[str, object]]]:
    """Behavior to certify plus source-specific report fields"""
    if cfg.source == 'counts-file':
        try:
            record = read_counts(cfg.counts)
            return estimate(record), [("shots", record.shots)]
        except (CountsFormatError, EmptyRecord) as e:
            raise ConfigError('counts', str(e)) from e
    if cfg.source == 'classical':
        g, behavior = classical_guess_prob(four_lambda_attack(cfg.attack_q))
        return behavior, [("attack_guess_prob", g)]
    strategy = source_strategy(cfg)
    if cfg.shots:
        return estimate(sample(strategy, cfg.shots, cfg.seed)), [("shots", cfg.shots), ("seed", cfg.seed)]
    return behavior_of(strategy), []


def run_certify(cfg: RunConfig) -> Tuple[str, bool]:
    behavior, extra = source_behavior(cfg)
    certifier = Certifier(cfg.tolerances())
    try:
        verdict = certifier.certify(behavior, source=cfg.source_label())
    except MissingStatistics as e:
        raise ConfigError('counts', str(e)) from e
    pairs = [("command", "certify"), ("source", cfg.source_label())] + extra
    pairs += [("estimated", behavior.estimated)] + verdict.report_fields()
    return render_report(pairs), verdict.certified


def run_sweep(cfg: RunConfig) -> Tuple[str, bool]:
    families = list(FAMILIES) if cfg.family == 'all' else [cfg.family]
    rows = []
    for family in families:
        rows.extend(attack_sweep(family, tolerances=cfg.tolerances(), jobs=cfg.jobs))
    violations = theorem_violations(rows)
    pairs = [
        ("command", "sweep"),
        ("families", " ".join(families)),
        ("rows", len(rows)),
        ("certified_rows", sum(r.certified for r in rows)),
        ("error_rows", sum(r.error is not None for r in rows)),
        ("max_g_lower_certified", max((r.g_lower for r in rows if r.certified), default=float('nan'))),
        ("theorem_violations", len(violations)),
    ]
    return render_report(pairs, format_sweep_table(rows)), not violations


def run_bruteforce(cfg: RunConfig) -> Tuple[str, bool]:
    value, assignment = classical_max_bruteforce()
    pairs = [
        ("command", "bruteforce"),
        ("assignments_checked", 2 ** (len(assignment.alice) + len(assignment.bob))),
        ("classical_max", value),
        ("alice_assignment", " ".join(f"{x:+d}" for x in assignment.alice)),
        ("bob_assignment", " ".join(f"{y:+d}" for y in assignment.bob)),
    ]
    return render_report(pairs), True


def run_seesaw(cfg: RunConfig) -> Tuple[str, bool]:
    result = seesaw_maximize(SeesawConfig(max_rounds=cfg.max_rounds, seed=cfg.seed))
    pairs = [
        ("command", "seesaw"),
        ("seed", cfg.seed),
        ("max_rounds", cfg.max_rounds),
        ("s_value", result.value),
        ("quantum_max", QUANTUM_MAX),
        ("gap_to_quantum_max", QUANTUM_MAX - result.value),
        ("rounds", result.rounds),
        ("converged", result.converged),
        ("stopped_on_decrease", result.stopped_on_decrease),
    ]
    table = "round\tS\n" + "".join(f"{i}\t{s!r}\n" for i, s in enumerate(result.trace, start=1))
    return render_report(pairs, table), True


def run_sample(cfg: RunConfig) -> Tuple[str, bool]:
    return format_counts(sample(source_strategy(cfg), cfg.shots, cfg.seed)), True


def run_report(cfg: RunConfig) -> Tuple[str, bool]:
    summary_path = cfg.out if cfg.out != '-' else os.path.join('reports', 'summary.md')
    path = generate_report(cfg.log, summary_path, verbose=False)
    pairs = [("command", "report"), ("log_pattern", cfg.log), ("summary", path or "none")]
    return render_report(pairs), path is not None


HANDLERS = {
    'certify': run_certify,
    'sweep': run_sweep,
    'bruteforce': run_bruteforce,
    'seesaw': run_seesaw,
    'sample': run_sample,
    'report': run_report,
}


def run(cfg: RunConfig) -> int:
    """Execute one command and emit its report; the verdict never changes the exit status"""
    cfg.validate()
    to_file = cfg.out != '-'
    if to_file and cfg.command != 'report':
        print("=" * 80)
        print(f"EBI TOOLKIT - {cfg.command.upper()} ({cfg.source_label()})")
        print("=" * 80)

    text, ok = HANDLERS[cfg.command](cfg)
    # the report command writes its markdown summary to --out itself
    if cfg.command != 'report' or not to_file:
        emit(cfg, text)

    if to_file:
        mark = "✅" if ok else "❌"
        print(f"{mark} {cfg.command}: report written to {cfg.out}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = resolve_config(argv)
        return run(cfg)
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    # UTF-8 output for ✅/❌ and √ on narrow consoles
    if hasattr(sys.stdout, 'buffer'):
        try:
            sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8', errors='replace')
        except (AttributeError, ValueError):
            pass
    sys.exit(main())
