"""Command-line interface: ``hurwitz-approx <command> ...``.

Targets are written ``--phi r/m/n`` for phi = (r theta + m)/n. Rationals are
printed as ``p/q`` strings so JSON output never goes through floats.
"""

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from . import __version__
from .approx import (
    ApproxResult,
    BoundOnly,
    ExactValue,
    Nonzero,
    ReducedTarget,
    ReductionError,
    Zero,
    fast_is_zero_exp,
    reduce,
    value,
)
from .cf_engine import (
    BUILTIN_KINDS,
    DescriptorError,
    HurwitzianDescriptor,
    builtin_descriptor,
    convergent,
    convergents,
    mu,
    parse_descriptor,
    quotients,
)
from .config import get_config, setup_environment
from .mod_arith import PeriodBudgetExceeded, PeriodInfo, convergent_mod_period, leaper_period, quotient_mod_period
from .oracle import ClassificationError, PrecisionExhausted, liminf_scan, window_rows
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4

KIND_ALIASES = {'exp2over': 'exp_2_over', 'expinv': 'exp_inv', 'tanh': 'tanh_inv', 'golden': 'all_ones'}
KINDS = BUILTIN_KINDS + ('pattern',)
TAGS = ('zero', 'value', 'bound', 'unknown')


class UsageError(ValueError):
    pass


# ----------------------------------------
# Argument helpers
# ----------------------------------------

def parse_phi(text: str) -> Tuple[int, int, int]:
    """``"r/m/n"`` -> (r, m, n)."""
    parts = text.split('/')
    if len(parts) != 3:
        raise UsageError(f"--phi expects r/m/n, got '{text}'")
    try:
        r, m, n = (int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"--phi expects integers r/m/n, got '{text}'") from exc
    return r, m, n


def parse_range(text: str) -> range:
    """``"a:b"`` (inclusive) or a single integer."""
    lo, _, hi = text.partition(':')
    try:
        lo_value = int(lo)
        hi_value = int(hi) if hi else lo_value
    except ValueError as exc:
        raise UsageError(f"range expects a:b, got '{text}'") from exc
    return range(lo_value, hi_value + 1)


def canonical_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise UsageError(f"unknown kind '{kind}' (expected one of {', '.join(KINDS)})")
    return kind


def resolve_descriptor(kind: str, param: Optional[str], s_one_is_e: bool = False) -> HurwitzianDescriptor:
    """Descriptor for a command-line kind; sweeps over s read ``exp_inv 1`` as e."""
    kind = canonical_kind(kind)
    if kind == 'pattern':
        if not param:
            raise UsageError("kind 'pattern' needs a descriptor such as '2;;1,2j,1'")
        return parse_descriptor(param)
    if param is None:
        return builtin_descriptor(kind)
    try:
        number = int(param)
    except ValueError as exc:
        raise UsageError(f"parameter of '{kind}' must be an integer, got '{param}'") from exc
    if s_one_is_e and kind == 'exp_inv' and number == 1:
        return builtin_descriptor('e')
    return builtin_descriptor(kind, number)


def exp_parameter(kind: str, param: Optional[str]) -> int:
    """s with theta = e^{1/s}, for the leaper fast path."""
    kind = canonical_kind(kind)
    if kind == 'e':
        return 1
    if kind == 'exp_inv' and param is not None:
        return int(param)
    if kind == 'exp_2_over' and param is not None and int(param) % 2 == 0:
        return int(param) // 2
    raise UsageError(f"--fast needs theta = e^(1/s); '{kind} {param or ''}' is not of that form")


def fraction_str(x) -> Optional[str]:
    if x is None:
        return None
    if isinstance(x, float):
        return 'inf' if x == float('inf') else repr(x)
    return str(Fraction(x))


def result_to_dict(result: ApproxResult) -> Dict[str, Any]:
    if isinstance(result, Zero):
        return {'tag': 'zero', 'index': result.index, 'g': result.g, 'leaper_index': result.leaper_index,
                'multiplications': result.multiplications}
    if isinstance(result, Nonzero):
        return {'tag': 'nonzero', 'multiplications': result.multiplications}
    if isinstance(result, ExactValue):
        return {'tag': 'value', 'n2L': fraction_str(result.n2L), 'M': fraction_str(result.M),
                'class_offsets': list(result.class_offsets)}
    if isinstance(result, BoundOnly):
        return {'tag': 'bound', 'lower': fraction_str(result.lower), 'upper': fraction_str(result.upper)}
    return {'tag': 'unknown', 'reason': result.reason}


def period_to_dict(info: PeriodInfo) -> Dict[str, Any]:
    return {
        'preperiod_len': info.preperiod_len,
        'period_len': info.period_len,
        'completely_periodic': info.completely_periodic,
        'entries': [entry.pair if hasattr(entry, 'pair') else entry for entry in info.entries],
    }


def emit(payload: Dict[str, Any], as_json: bool, text: str) -> None:
    print(json.dumps(payload, sort_keys=True) if as_json else text)


# ----------------------------------------
# Sweep rows
# ----------------------------------------

@dataclass(frozen=True)
class SweepRow:
    kind: str
    param: Optional[str]
    n: int
    r: int
    m: int
    tag: str
    n2L: Optional[str] = None
    witness: Optional[Tuple[int, int]] = None
    multiplications: Optional[int] = None
    oracle: Optional[str] = None
    note: Optional[str] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown decision tag '{self.tag}'")
        if (self.n2L is not None) != (self.tag == 'value'):
            raise ValueError("n2L is present exactly for value rows")
        if self.witness is not None:
            object.__setattr__(self, 'witness', tuple(self.witness))

    @property
    def key(self) -> Tuple:
        param = self.param or ''
        return (self.kind, len(param), param, self.n, self.r, self.m)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> 'SweepRow':
        return cls(**json.loads(line))


def decide_row(kind: str, param: Optional[str], target: ReducedTarget, fast: bool = False,
               budget: Optional[int] = None, oracle_qmax: Optional[int] = None,
               s_one_is_e: bool = False) -> SweepRow:
    kind = canonical_kind(kind)
    base = dict(kind=kind, param=param, n=target.n, r=target.r, m=target.m)
    d = resolve_descriptor(kind, param, s_one_is_e)
    multiplications = None
    if fast:
        quick = fast_is_zero_exp(exp_parameter(kind, param), target)
        multiplications = quick.multiplications
        if isinstance(quick, Zero):
            return SweepRow(tag='zero', witness=quick.witness, multiplications=multiplications, **base,
                            oracle=_oracle_flag(d, target, Fraction(0), oracle_qmax))

    result = value(d, target, budget)
    if isinstance(result, Zero):
        return SweepRow(tag='zero', witness=_leaper_witness(kind, param, target, result),
                        multiplications=multiplications, **base,
                        oracle=_oracle_flag(d, target, Fraction(0), oracle_qmax))
    if isinstance(result, ExactValue):
        expected = result.n2L / (target.n * target.n)
        return SweepRow(tag='value', n2L=fraction_str(result.n2L), multiplications=multiplications, **base,
                        oracle=_oracle_flag(d, target, expected, oracle_qmax))
    if isinstance(result, BoundOnly):
        return SweepRow(tag='bound', multiplications=multiplications, **base,
                        note=f"lower={fraction_str(result.lower)} upper={fraction_str(result.upper)}")
    return SweepRow(tag='unknown', multiplications=multiplications, note=result.reason, **base)


def _leaper_witness(kind: str, param: Optional[str], target: ReducedTarget, result: Zero) -> Tuple[int, int]:
    """(leaper index, g) for theta = e^{1/s}; other kinds keep the convergent index."""
    try:
        s = exp_parameter(kind, param)
    except UsageError:
        return result.witness
    quick = fast_is_zero_exp(s, target)
    return quick.witness if isinstance(quick, Zero) else result.witness


def _oracle_flag(d, target, expected: Fraction, q_max: Optional[int]) -> Optional[str]:
    if not q_max:
        return None
    record = liminf_scan(d, target, q_max, q_min=max(1, q_max // 64))
    return record.consistency(expected)


def _sweep_task(task: Tuple) -> SweepRow:
    kind, param, r, m, n, fast, budget, oracle_qmax = task
    try:
        return decide_row(kind, param, ReducedTarget(r, m, n), fast, budget, oracle_qmax, s_one_is_e=True)
    except PeriodBudgetExceeded as exc:
        note = f"budget exceeded: {exc}"
    except ValueError as exc:
        # bad parameters are recorded per row so the rest of the sweep still runs
        note = f"invalid: {exc}"
    logging.warning(f"sweep {kind} {param} at {r}/{m}/{n}: {note}")
    return SweepRow(kind, param, n, r, m, 'unknown', note=note)


def sweep_targets(n: int, all_targets: bool) -> Iterable[ReducedTarget]:
    if not all_targets:
        yield reduce(0, 1, n)
        return
    for r in range(n):
        for m in range(n):
            try:
                target = reduce(r, m, n)
            except ReductionError:
                continue
            if target.n == n:
                yield target


def read_rows(path: Path) -> Dict[Tuple, SweepRow]:
    rows: Dict[Tuple, SweepRow] = {}
    if not path.exists():
        return rows
    with open(path, 'r') as f:
        for line in f:
            if line.strip():
                row = SweepRow.from_json(line)
                rows[row.key] = row
    return rows


def write_rows_atomic(path: Path, rows: Iterable[SweepRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w') as f:
            for row in sorted(rows, key=lambda row: row.key):
                f.write(row.to_json() + '\n')
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def run_sweep(kind: str, params: Iterable[Optional[str]], moduli: Iterable[int], out: Path, *,
              odd_only: bool = False, all_targets: bool = False, fast: bool = False,
              budget: Optional[int] = None, workers: int = 1, oracle_qmax: Optional[int] = None) -> List[SweepRow]:
    kind = canonical_kind(kind)
    done = read_rows(out)
    tasks = []
    for param in params:
        for n in moduli:
            if n < 2 or (odd_only and n % 2 == 0):
                continue
            for target in sweep_targets(n, all_targets):
                pending = SweepRow(kind, param, target.n, target.r, target.m, 'unknown')
                if pending.key in done:
                    continue
                tasks.append((kind, param, target.r, target.m, target.n, fast, budget, oracle_qmax))

    logging.info(f"sweep: {len(done)} rows cached, {len(tasks)} to compute with {workers} worker(s)")
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            computed = pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
    else:
        computed = [_sweep_task(task) for task in tasks]

    for row in computed:
        done[row.key] = row
    write_rows_atomic(out, done.values())
    return sorted(done.values(), key=lambda row: row.key)


# ----------------------------------------
# Commands
# ----------------------------------------

def cmd_expand(args) -> int:
    d = resolve_descriptor(args.kind, args.param)
    terms = [b for b, _ in zip(quotients(d), range(args.count))]
    convs = [c for c, _ in zip(convergents(d), range(args.count + 1))][1:]
    payload = {'descriptor': str(d), 'quotients': terms, 'convergents': [list(c.pair) for c in convs]}
    lines = [' '.join(str(b) for b in terms)] + [f"P_{c.index} = {c.p}/{c.q}" for c in convs]
    emit(payload, args.json, '\n'.join(lines))
    return EXIT_OK


def cmd_convergent(args) -> int:
    d = resolve_descriptor(args.kind, args.param)
    c = convergent(d, args.index)
    payload = {'index': c.index, 'p': c.p, 'q': c.q}
    text = f"P_{c.index} = ({c.p}, {c.q})"
    if c.index >= 0:
        interval = mu(d, c.index, get_config().get('precision_bits', 256))
        payload['mu'] = [fraction_str(interval.lo), fraction_str(interval.hi)]
        text += f"  mu = {interval}"
    emit(payload, args.json, text)
    return EXIT_OK


def cmd_mod_period(args) -> int:
    d = resolve_descriptor(args.kind, args.param)
    if args.of == 'quotients':
        info = quotient_mod_period(d, args.modulus)
    else:
        info = convergent_mod_period(d, args.modulus)
    entries = ', '.join(str(e) for e in info.entries)
    emit(period_to_dict(info), args.json,
         f"preperiod {info.preperiod_len}, period {info.period_len}: {entries}")
    return EXIT_OK


def cmd_leaper_period(args) -> int:
    info = leaper_period(args.s, args.modulus)
    entries = ', '.join(str(e) for e in info.entries)
    emit(period_to_dict(info), args.json, f"period {info.period_len}: {entries}")
    return EXIT_OK


def _target(args) -> ReducedTarget:
    return reduce(*parse_phi(args.phi))


def cmd_decide(args) -> int:
    row = decide_row(args.kind, args.param, _target(args), args.fast, None, args.oracle_qmax)
    text = f"{row.tag}" + (f" {row.n2L}" if row.n2L else '')
    if row.witness:
        text += f" witness={row.witness[0]} g={row.witness[1]}"
    if row.multiplications is not None:
        text += f" multiplications={row.multiplications}"
    emit(asdict(row), args.json, text)
    return EXIT_OK


def cmd_value(args) -> int:
    d = resolve_descriptor(args.kind, args.param)
    target = _target(args)
    result = value(d, target)
    payload = result_to_dict(result)
    payload['target'] = [target.r, target.m, target.n]
    text = ' '.join(f"{k}={v}" for k, v in payload.items() if v is not None)
    emit(payload, args.json, text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    out = Path(args.out or get_config().results_path("sweep.jsonl"))
    params: List[Optional[str]] = [str(p) for p in parse_range(args.params)] if args.params else [None]
    workers = args.workers if args.workers is not None else get_config().get('sweep.workers', 1)
    rows = run_sweep(args.kind, params, parse_range(args.n_range), out, odd_only=args.odd,
                     all_targets=args.all_targets, fast=args.fast, workers=workers,
                     oracle_qmax=args.oracle_qmax)
    print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suite(args.suite, args.max)
    payload = asdict(report)
    text = f"{report.suite}: {'pass' if report.passed else 'FAIL'} ({report.checked} checks)"
    if report.counterexample:
        text += f"\ncounterexample: {report.counterexample}"
    emit(payload, args.json, text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_oracle(args) -> int:
    d = resolve_descriptor(args.kind, args.param)
    target = _target(args)
    q_max = args.qmax if args.qmax is not None else get_config().get('oracle.qmax', 1 << 20)
    if q_max < 16:
        raise UsageError(f"--qmax must be >= 16, got {q_max}")
    record = liminf_scan(d, target, q_max, args.tol, q_min=args.qmin)
    payload = {
        'q_min': record.q_min,
        'q_max': record.q_max,
        'tolerance': fraction_str(record.tolerance),
        'estimate': [fraction_str(record.estimate.lo), fraction_str(record.estimate.hi)],
        'windows': window_rows(record),
    }
    decision = None if d.is_quadratic else value(d, target)
    if isinstance(decision, (Zero, ExactValue)):
        payload['consistency'] = record.consistency(decision.n2L / (target.n * target.n))
    if args.csv:
        with open(args.csv, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=['window_exponent', 'min_value_lo', 'min_value_hi', 'argmin_q'])
            writer.writeheader()
            writer.writerows(window_rows(record))
    print(json.dumps(payload, sort_keys=True, indent=None if args.json else 2))
    return EXIT_OK


# ----------------------------------------
# Parser
# ----------------------------------------

def _add_theta(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('kind', help=f"one of {', '.join(KINDS)} (aliases: {', '.join(KIND_ALIASES)})")
    parser.add_argument('param', nargs='?', default=None, help="integer parameter, or the pattern text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hurwitz-approx',
        description="Inhomogeneous approximation constants of Hurwitzian numbers.")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('-v', '--verbose', action='count', default=0, help="-v for INFO, -vv for DEBUG")
    parser.add_argument('--env-file', action='append', default=None, help="extra .env file(s) to load")
    parser.add_argument('--json', action='store_true', help="machine-readable output")
    parser.add_argument('--precision-bits', type=int, default=None, help="interval precision for mu")
    parser.add_argument('--budget', type=int, default=None, help="period detection budget multiplier")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('expand', help="partial quotients and convergents")
    _add_theta(p)
    p.add_argument('--count', type=int, default=10)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser('convergent', help="one convergent and its mu enclosure")
    _add_theta(p)
    p.add_argument('--index', type=int, required=True)
    p.set_defaults(func=cmd_convergent)

    p = sub.add_parser('mod-period', help="period of quotients or convergents mod n")
    _add_theta(p)
    p.add_argument('--modulus', '-n', type=int, required=True)
    p.add_argument('--of', choices=['quotients', 'convergents'], default='convergents')
    p.set_defaults(func=cmd_mod_period)

    p = sub.add_parser('leaper-period', help="period of the leapers of e^(1/s) mod n")
    p.add_argument('s', type=int)
    p.add_argument('modulus', type=int)
    p.set_defaults(func=cmd_leaper_period)

    for name, func, helptext in (('decide', cmd_decide, "decision row for one target"),
                                 ('value', cmd_value, "exact value / bounds for one target")):
        p = sub.add_parser(name, help=helptext)
        _add_theta(p)
        p.add_argument('--phi', required=True, help="target (r theta + m)/n as r/m/n")
        if name == 'decide':
            p.add_argument('--fast', action='store_true', help="leaper fast path (theta = e^(1/s))")
            p.add_argument('--oracle-qmax', type=int, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser('sweep', help="JSONL sweep over parameters and moduli")
    p.add_argument('kind')
    p.add_argument('--params', default=None, help="parameter range a:b")
    p.add_argument('--n-range', required=True, help="modulus range a:b")
    p.add_argument('--odd', action='store_true', help="odd moduli only")
    p.add_argument('--all-targets', action='store_true', help="every reduced (r, m) instead of 1/n")
    p.add_argument('--fast', action='store_true')
    p.add_argument('--out', default=None)
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--oracle-qmax', type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('verify', help="run a verification suite")
    p.add_argument('suite', choices=list(SUITES))
    p.add_argument('--max', type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('oracle', help="numerical liminf scan")
    _add_theta(p)
    p.add_argument('--phi', required=True)
    p.add_argument('--qmax', type=int, default=None)
    p.add_argument('--qmin', type=int, default=1)
    p.add_argument('--tol', default=None)
    p.add_argument('--csv', default=None, help="write window minima as CSV")
    p.set_defaults(func=cmd_oracle)

    return parser


def _configure(args) -> None:
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')
    overrides: Dict[str, Any] = {}
    if args.precision_bits is not None:
        overrides['precision_bits'] = args.precision_bits
    if args.budget is not None:
        overrides['budget.multiplier'] = args.budget
    setup_environment(default_config=overrides, env_files=args.env_file, force_reinit=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    _configure(args)

    try:
        return args.func(args)
    except PeriodBudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ClassificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UsageError, DescriptorError, ReductionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
