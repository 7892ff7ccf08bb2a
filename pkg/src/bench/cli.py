"""Command line entry point: qme solve | bench | reproduce | export."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.bench.config import FORMATS, SOLVERS, STOP_RULES, BenchConfig, RunSpec
from src.bench.experiments import (
    EXPERIMENTS,
    ExperimentResult,
    example1_table,
    example2_runs,
    example3_table,
    reproduce_all,
)
from src.bench.runner import run
from src.bench.writers import write_file, write_records
from src.errors import ConfigError, QmeError
from src.matpoly.io import dump_bundle, save_polynomial
from src.problems.suite import builtin_instance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER_FAILURE = 1
EXIT_CONFIG_ERROR = 2

PROBLEMS = ("example1", "example2", "example3", "random", "drift")


def _parse_param(text: str) -> Tuple[str, Any]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    for cast in (int, float):
        try:
            return key, cast(value)
        except ValueError:
            pass
    return key, value


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected integers like 16,32, got {text!r}") from err


def _add_problem_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--problem", choices=PROBLEMS, help="Builtin problem generator")
    parser.add_argument(
        "--param",
        type=_parse_param,
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Generator parameter, e.g. p=8, m=32, case=2, ell=4, field=real, drift=0.2",
    )
    parser.add_argument("--seed", type=int, default=BenchConfig.SEED, help="Generator seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qme",
        description="Solve quadratic matrix equations and reproduce the benchmark experiments.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Shortcut for INFO logging")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Run one solver on one instance")
    solve.add_argument("--solver", choices=SOLVERS, required=True)
    _add_problem_arguments(solve)
    solve.add_argument("--a0", type=Path, help="Matrix Market file for A0")
    solve.add_argument("--a1", type=Path, help="Matrix Market file for A1")
    solve.add_argument("--a2", type=Path, help="Matrix Market file for A2")
    solve.add_argument("--bundle", type=Path, help="JSON bundle with A0, A1 and A2")
    solve.add_argument("--ell", type=int, help="Number of unit-circle eigenvalues of G (bscr)")
    solve.add_argument("--tol", type=float, default=BenchConfig.TOL)
    solve.add_argument("--max-iter", type=int, help="Iteration cap (default depends on solver)")
    solve.add_argument("--eps", type=float, default=BenchConfig.EPS, help="bscr gap threshold")
    solve.add_argument(
        "--no-require-gap",
        action="store_true",
        help="bscr: use the last iterate when the gap test never passes",
    )
    solve.add_argument(
        "--stop",
        choices=STOP_RULES,
        default=BenchConfig.STOP,
        help="bscr: stop on the gap test or on the residual reaching --tol",
    )
    solve.add_argument("--format", choices=FORMATS, default="json")
    solve.add_argument("--output", type=Path, help="Write the report here instead of stdout")

    bench = sub.add_parser("bench", help="Run one of the benchmark experiments")
    bench.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    bench.add_argument("--pmin", type=int, default=min(BenchConfig.EXAMPLE2_P))
    bench.add_argument("--pmax", type=int, default=max(BenchConfig.EXAMPLE2_P))
    bench.add_argument("--m", type=_int_list, default=list(BenchConfig.EXAMPLE3_M))
    bench.add_argument("--cases", type=_int_list, default=list(BenchConfig.EXAMPLE3_CASES))
    bench.add_argument("--seed", type=int, default=BenchConfig.SEED)
    bench.add_argument(
        "--table",
        choices=["residuals", "time"],
        default="residuals",
        help="example2 only: residual table or iteration/time table",
    )
    bench.add_argument("--workers", type=int, default=BenchConfig.WORKERS)
    bench.add_argument("--format", choices=FORMATS, default="csv")
    bench.add_argument("--output", type=Path)

    reproduce = sub.add_parser("reproduce", help="Run every experiment and write a summary")
    reproduce.add_argument("--outdir", type=Path, default=Path("results"))
    reproduce.add_argument("--workers", type=int, default=BenchConfig.WORKERS)
    reproduce.add_argument("--seed", type=int, default=BenchConfig.SEED)
    reproduce.add_argument("--p-values", type=_int_list, default=list(BenchConfig.EXAMPLE2_P))
    reproduce.add_argument("--m-values", type=_int_list, default=list(BenchConfig.EXAMPLE3_M))

    export = sub.add_parser("export", help="Write a builtin instance to disk")
    _add_problem_arguments(export)
    export.add_argument("--format", choices=["mtx", "json"], default="json")
    export.add_argument(
        "--output", type=Path, required=True, help="Bundle path, or prefix for .mtx files"
    )
    return parser


def _emit(
    rows: Sequence[Dict[str, Any]],
    fmt: str,
    output: Optional[Path],
    columns: Optional[Sequence[str]] = None,
) -> None:
    if output is not None:
        write_file(rows, output, fmt, columns)
    else:
        write_records(rows, sys.stdout, fmt, columns)


def _powers_of_two(low: int, high: int) -> List[int]:
    if low < 2 or high < low:
        raise ConfigError(f"need 2 <= pmin <= pmax, got {low}, {high}")
    values: List[int] = []
    p = 1
    while p <= high:
        if p >= low:
            values.append(p)
        p *= 2
    return values or [low]


def cmd_solve(args: argparse.Namespace) -> int:
    paths = [p for p in (args.a0, args.a1, args.a2) if p is not None]
    if args.bundle is not None:
        paths = [args.bundle] + paths
    spec = RunSpec(
        solver=args.solver,
        problem=args.problem,
        params=dict(args.param),
        paths=tuple(paths),
        tol=args.tol,
        kmax=args.max_iter,
        ell=args.ell,
        seed=args.seed,
        eps=args.eps,
        require_gap=not args.no_require_gap,
        stop=args.stop,
        output=args.output,
        fmt=args.format,
    )
    outcome = run(spec)
    _emit([outcome.to_record()], spec.fmt, spec.output)
    return EXIT_OK if outcome.ok else EXIT_SOLVER_FAILURE


def cmd_bench(args: argparse.Namespace) -> int:
    result: ExperimentResult
    if args.experiment == "example1":
        result = example1_table(args.workers)
    elif args.experiment == "example2":
        residuals, times = example2_runs(_powers_of_two(args.pmin, args.pmax), args.workers)
        result = residuals if args.table == "residuals" else times
        result.failures = residuals.failures
    else:
        result = example3_table(args.m, args.cases, args.seed, args.workers)
    _emit(result.rows, args.format, args.output, result.columns)
    for failure in result.failures:
        logger.warning(f"solver failure: {json.dumps(failure, default=str)}")
    return EXIT_OK if not result.failures else EXIT_SOLVER_FAILURE


def cmd_reproduce(args: argparse.Namespace) -> int:
    summary = reproduce_all(
        args.outdir,
        workers=args.workers,
        p_values=args.p_values,
        m_values=args.m_values,
        seed=args.seed,
    )
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    if args.problem is None:
        raise ConfigError("export needs --problem")
    params = dict(args.param)
    params.setdefault("seed", args.seed)
    instance = builtin_instance(args.problem, **params)
    if args.format == "json":
        dump_bundle(instance.polynomial, args.output)
        written = [args.output]
    else:
        written = save_polynomial(instance.polynomial, args.output)
    for path in written:
        print(path)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "reproduce": cmd_reproduce,
    "export": cmd_export,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = "INFO" if args.verbose and args.log_level == "WARNING" else args.log_level
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, OSError, ValueError) as err:
        logger.error(f"Configuration error: {err}")
        if isinstance(err, QmeError):
            record = err.to_record()
        else:
            record = {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(record, default=str), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except QmeError as err:
        logger.error(f"Solver failure: {err}")
        print(json.dumps(err.to_record(), default=str), file=sys.stderr)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
