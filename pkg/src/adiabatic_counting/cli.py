#!/usr/bin/env python3
"""
Adiabatic Counting CLI
Command-line interface for counting runs, invariant validation and cost-scaling sweeps.
"""

import argparse
import logging
import math
import sys
from dataclasses import fields
from pathlib import Path
from typing import Callable, Dict, List, Optional

from .analysis.scheduler import CountingScheduler, scaling_curve
from .analytics.validation import run_suites
from .core.closed_form import check_omega
from .core.database import load_instance
from .core.exceptions import CountingError, InstanceFormatError
from .core.integrator import integrate_2d
from .core.models import EngineMode, IntegrationConfig, RunConfig, ValidationLevel
from .output.report import ReportGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_GUARD = 2

_INT_FIELDS = {'m', 'seed', 'r0'}
_FLOAT_FIELDS = {'c_omega', 'delta', 'failure_prob', 'r_slope', 'step'}


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )


def load_config_file(file_path: str) -> Dict[str, object]:
    """
    Parse a flat key=value file into RunConfig field values.

    Blank lines and lines starting with '#' are skipped; keys may use dashes
    or underscores.
    """
    known = {f.name for f in fields(RunConfig)}
    values: Dict[str, object] = {}
    for line_no, raw in enumerate(Path(file_path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise InstanceFormatError(f"{file_path}:{line_no}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        key = key.replace('-', '_')
        if key not in known:
            raise InstanceFormatError(f"{file_path}:{line_no}: unknown config key {key!r}")
        values[key] = _coerce(key, value, f"{file_path}:{line_no}")
    return values


def _coerce(key: str, value: str, where: str) -> object:
    try:
        if key in _INT_FIELDS:
            return int(value)
        if key in _FLOAT_FIELDS:
            return float(value)
    except ValueError as e:
        raise InstanceFormatError(f"{where}: bad value for {key}: {e}") from e
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then explicit flags."""
    values: Dict[str, object] = {}
    if getattr(args, 'config', None):
        values.update(load_config_file(args.config))
    for f in fields(RunConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            values[f.name] = flag_value
    return RunConfig(**values)


def _report_failure(e: Exception) -> int:
    """One-line reason on stderr; format and I/O problems exit 1, guard violations exit 2."""
    if isinstance(e, CountingError) and not isinstance(e, InstanceFormatError):
        code, reason = EXIT_GUARD, f"{type(e).__name__}: {e}"
    else:
        code, reason = EXIT_IO, str(e)
    logger.error(reason)
    print(f"error: {reason}", file=sys.stderr)
    return code


def _run_guarded(action: Callable[[], int]) -> int:
    try:
        return action()
    except (CountingError, OSError) as e:
        return _report_failure(e)


def cmd_count(config: RunConfig) -> int:
    def action() -> int:
        if not config.instance:
            raise InstanceFormatError("No instance file given (--instance or instance= in --config)")
        db = load_instance(config.instance)
        scheduler = CountingScheduler(
            c_omega=config.c_omega,
            delta=config.delta,
            failure_prob=config.failure_prob,
            r0=config.r0,
            r_slope=config.r_slope,
            integration=IntegrationConfig(step=config.step),
        )
        result = scheduler.run(db, config.m, config.mode, config.seed)

        reports = ReportGenerator(config.out)
        result_file = reports.generate_result_json(result, config)
        stages_file = reports.generate_stages_jsonl(result)

        print(f"alpha_hat = {result.estimate.value} ({float(result.estimate.value):.6f}), "
              f"true alpha = {result.alpha_true}")
        print(f"bits = {''.join(str(b) for b in result.estimate.bits)}, "
              f"epsilon = {result.estimate.epsilon}, T_total = {result.ledger.total:.6g}")
        print(f"Result: {result_file}")
        print(f"Stages: {stages_file}")
        return EXIT_OK

    return _run_guarded(action)


def cmd_validate(level: ValidationLevel = ValidationLevel.FAST, only: Optional[List[str]] = None) -> int:
    def action() -> int:
        results = run_suites(ValidationLevel(level), only=only)
        width = max((len(r.name) for r in results), default=10)
        for r in results:
            print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
        failed = [r.name for r in results if not r.passed]
        print(f"\n{len(results) - len(failed)}/{len(results)} suites passed")
        return EXIT_OK if not failed else 1

    return _run_guarded(action)


def cmd_scaling(m_lo: int, m_hi: int, c_omega: float = 0.05, out: str = "./results") -> int:
    def action() -> int:
        curve = scaling_curve(m_lo, m_hi, c_omega)
        csv_file = ReportGenerator(out).generate_scaling_csv(curve)
        print(f"slope = {curve.slope:.6f}")
        print(f"Scaling curve: {csv_file}")
        return EXIT_OK

    return _run_guarded(action)


def cmd_trajectory(
    alpha: float,
    omega: float,
    stage: int = 1,
    reversed: bool = False,
    step: Optional[float] = None,
    out: str = "./results",
) -> int:
    def action() -> int:
        T = (2 ** stage) * math.pi / check_omega(omega)
        rows = []
        final = integrate_2d(
            alpha, omega, T, reversed=reversed,
            cfg=IntegrationConfig(step=step, store_trajectory=True), buffer=rows,
        )
        name = f"trajectory_a{alpha:g}_w{omega:g}_j{stage}{'_rev' if reversed else ''}.csv"
        csv_file = ReportGenerator(out).generate_trajectory_csv(rows, name)
        print(f"final state = ({final.x:.12f}, {final.y:.12f}), {len(rows)} rows")
        print(f"Trajectory: {csv_file}")
        return EXIT_OK

    return _run_guarded(action)


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument('--config', type=str, help='Flat key=value config file (flags override it)')
    p.add_argument('--instance', type=str, help='Instance file with n= and marked= lines')
    p.add_argument('--m', type=int, help='Number of precision stages (default: 4)')
    p.add_argument('--mode', choices=[mode.value for mode in EngineMode], help='Engine (default: closed_form)')
    p.add_argument('--seed', type=int, help='Top-level random seed (default: 0)')
    p.add_argument('--c-omega', dest='c_omega', type=float, help='Rate constant c in omega_j = c 2^(-j/2) (default: 0.05)')
    p.add_argument('--delta', type=float, help='Chernoff tolerance (default: 0.22)')
    p.add_argument('--failure-prob', dest='failure_prob', type=float, help='Overall failure budget (default: 0.1)')
    p.add_argument('--r0', type=int, help='Repetitions at the last stage')
    p.add_argument('--r-slope', dest='r_slope', type=float, help='Extra repetitions per earlier stage')
    p.add_argument('--step', type=float, help='Integrator step (default: min(1e-3, omega/50))')
    p.add_argument('--out', type=str, help='Output directory (default: ./results)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='adiabatic-counting',
        description="Adiabatic quantum counting - simulate Berry-phase counting runs and check their invariants",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Count the marked items of an instance with 4 precision stages
  adiabatic-counting count --instance instance.txt --m 4 --out ./results

  # Same run driven by a config file, with the 2-D integrator instead of the closed form
  adiabatic-counting count --config run.cfg --mode integrate_2d --step 0.005

  # Run the invariant suites
  adiabatic-counting validate --level fast

  # Total evolution time against precision
  adiabatic-counting scaling --m-lo 4 --m-hi 12
        """
    )
    parser.add_argument('--verbose', action='store_true', help='Enable verbose output')
    sub = parser.add_subparsers(dest='command', required=True)

    count = sub.add_parser('count', help='Run the counting algorithm on one instance')
    _add_run_options(count)

    validate = sub.add_parser('validate', help='Run the invariant suites')
    validate.add_argument('--level', choices=[lvl.value for lvl in ValidationLevel], default='fast')
    validate.add_argument('--suite', action='append', help='Run only the named suite (repeatable)')

    scaling = sub.add_parser('scaling', help='Write scaling.csv and print the log-log slope')
    scaling.add_argument('--m-lo', dest='m_lo', type=int, required=True)
    scaling.add_argument('--m-hi', dest='m_hi', type=int, required=True)
    scaling.add_argument('--c-omega', dest='c_omega', type=float, default=0.05)
    scaling.add_argument('--out', type=str, default='./results')

    trajectory = sub.add_parser('trajectory', help='Dump a 2-D integrator trajectory as CSV')
    trajectory.add_argument('--alpha', type=float, required=True)
    trajectory.add_argument('--omega', type=float, required=True)
    trajectory.add_argument('--stage', type=int, default=1, help='Sweep theta over [0, 2^stage pi]')
    trajectory.add_argument('--reversed', action='store_true')
    trajectory.add_argument('--step', type=float)
    trajectory.add_argument('--out', type=str, default='./results')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    if args.command == 'count':
        try:
            config = build_run_config(args)
        except (CountingError, OSError) as e:
            return _report_failure(e)
        return cmd_count(config)
    if args.command == 'validate':
        return cmd_validate(ValidationLevel(args.level), args.suite)
    if args.command == 'scaling':
        return cmd_scaling(args.m_lo, args.m_hi, args.c_omega, args.out)
    return cmd_trajectory(args.alpha, args.omega, args.stage, args.reversed, args.step, args.out)


if __name__ == '__main__':
    sys.exit(main())
