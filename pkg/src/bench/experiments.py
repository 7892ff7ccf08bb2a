"""Reproduction of the three benchmark experiments.

Example 1 compares all four solvers on a null-recurrent 4x4 QBD, Example 2 runs the cyclic
reduction variants to their iteration caps for growing block size, and Example 3 pits BS-CR
against CR on complex instances with 2, 4 and 8 unit-circle eigenvalues in G.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.bench.config import BenchConfig, RunSpec
from src.bench.runner import RunOutcome, run_many
from src.bench.writers import PathLike, markdown_table, write_file

logger = logging.getLogger(__name__)

# Example 1 has no stopping rule of its own; these make CR and S-CR stop once they are
# accurate and FPI run its full iteration budget.
EXAMPLE1_TOL = 1e-10
FPI_FULL_RUN_TOL = 1e-15
# Example 2 runs are stopped by the iteration cap only
EXAMPLE2_TOL = 1e-300

REFERENCE_EXAMPLE1 = {
    "bscr": (1, 3.9e-15),
    "scr": (29, 3.0e-12),
    "cr": (30, 4.4e-16),
    "fpi": (200000, 1.5e-10),
}

# (m, case) -> (BS-CR iterations, BS-CR residual, CR iterations or None, CR residual)
REFERENCE_EXAMPLE3: Dict[Tuple[int, int], Tuple[int, float, Optional[int], float]] = {
    (16, 1): (4, 1.23e-12, 17, 6.11e-09),
    (16, 2): (4, 8.44e-13, 19, 5.52e-09),
    (16, 3): (4, 1.52e-12, None, 3.03e-06),
    (32, 1): (4, 2.27e-12, 18, 3.56e-09),
    (32, 2): (4, 3.84e-12, 18, 7.63e-09),
    (32, 3): (4, 1.06e-11, None, 4.94e-06),
    (64, 1): (4, 7.49e-11, 17, 7.19e-09),
    (64, 2): (4, 6.58e-10, None, 1.38e-06),
    (64, 3): (4, 5.90e-10, None, 8.39e-06),
    (128, 1): (4, 5.49e-11, 19, 3.05e-09),
    (128, 2): (4, 5.36e-10, None, 3.86e-06),
    (128, 3): (4, 1.91e-10, None, 1.24e-05),
}

EXAMPLE1_COLUMNS = ("solver", "iterations", "time_ms", "residual_G", "residual_R", "converged")
EXAMPLE2_RESIDUAL_COLUMNS = ("p", "residual_bscr", "residual_scr", "residual_cr")
EXAMPLE2_TIME_COLUMNS = (
    "p",
    "iterations_bscr",
    "iterations_scr",
    "iterations_cr",
    "time_ms_bscr",
    "time_ms_scr",
    "time_ms_cr",
)
EXAMPLE3_COLUMNS = (
    "m",
    "case",
    "iterations_bscr",
    "residual_bscr",
    "converged_bscr",
    "iterations_cr",
    "residual_cr",
    "converged_cr",
)


@dataclass
class Check:
    """One acceptance check shown in the summary."""

    name: str
    reference: str
    measured: str
    passed: bool


@dataclass
class ExperimentResult:
    name: str
    rows: List[Dict[str, Any]]
    columns: Sequence[str]
    checks: List[Check] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)


def _residual(outcome: RunOutcome) -> float:
    """Final residual, taken from the partial report when the solver broke down."""
    if outcome.report is not None:
        return outcome.report.residual_G
    partial = getattr(outcome.error, "report", None)
    return float(getattr(partial, "residual_G", math.nan))


def _iterations(outcome: RunOutcome) -> Optional[int]:
    if outcome.report is not None:
        return outcome.report.iterations
    partial = getattr(outcome.error, "report", None)
    return getattr(partial, "iterations", None)


def _time_ms(outcome: RunOutcome) -> float:
    return outcome.report.time_ms if outcome.report is not None else math.nan


def _converged(outcome: RunOutcome) -> bool:
    return outcome.report is not None and outcome.report.converged


def _failures(outcomes: Sequence[RunOutcome], label: str) -> List[Dict[str, Any]]:
    failed = []
    for outcome in outcomes:
        if not outcome.ok:
            record = outcome.to_record()
            record["experiment"] = label
            record["problem"] = outcome.spec.problem
            record["params"] = dict(outcome.spec.params)
            failed.append(record)
    return failed


def _fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "–"
    return f"{value:.2e}" if isinstance(value, float) else str(value)


def _reference1(solver: str) -> str:
    iterations, residual = REFERENCE_EXAMPLE1[solver]
    return f"{iterations}, {residual:.1e}"


def example1_table(workers: int = BenchConfig.WORKERS) -> ExperimentResult:
    """All four solvers on Example 1, plus the FPI sublinearity witness."""
    base = RunSpec(solver="cr", problem="example1", tol=EXAMPLE1_TOL)
    specs = [
        replace(base, solver="bscr", tol=BenchConfig.TOL),
        replace(base, solver="scr"),
        replace(base, solver="cr"),
        replace(base, solver="fpi", tol=FPI_FULL_RUN_TOL),
        replace(base, solver="fpi", tol=FPI_FULL_RUN_TOL, kmax=BenchConfig.FPI_WITNESS_ITER),
    ]
    outcomes = run_many(specs, workers)
    rows = []
    for outcome in outcomes[:4]:
        rows.append(
            {
                "solver": outcome.spec.solver,
                "iterations": _iterations(outcome),
                "time_ms": _time_ms(outcome),
                "residual_G": _residual(outcome),
                "residual_R": (
                    outcome.report.residual_R if outcome.report is not None else math.nan
                ),
                "converged": _converged(outcome),
            }
        )
    by_solver = {row["solver"]: row for row in rows}
    witness = _residual(outcomes[4])

    checks = []
    bscr, cr, scr, fpi = by_solver["bscr"], by_solver["cr"], by_solver["scr"], by_solver["fpi"]
    checks.append(
        Check(
            "BS-CR iterations <= 3 and residual <= 1e-12",
            _reference1("bscr"),
            f"{bscr['iterations']}, {_fmt(bscr['residual_G'])}",
            (bscr["iterations"] or 99) <= 3 and bscr["residual_G"] <= 1e-12,
        )
    )
    checks.append(
        Check(
            "CR residual <= 1e-10 within 40 iterations",
            _reference1("cr"),
            f"{cr['iterations']}, {_fmt(cr['residual_G'])}",
            (cr["iterations"] or 99) <= 40 and cr["residual_G"] <= 1e-10,
        )
    )
    checks.append(
        Check(
            "S-CR residual <= 1e-10 within 40 iterations, more iterations than BS-CR",
            _reference1("scr"),
            f"{scr['iterations']}, {_fmt(scr['residual_G'])}",
            (scr["iterations"] or 99) <= 40
            and scr["residual_G"] <= 1e-10
            and (scr["iterations"] or 0) > (bscr["iterations"] or 0),
        )
    )
    checks.append(
        Check(
            "FPI residual after 200000 iterations in [1e-11, 1e-9]",
            _reference1("fpi"),
            _fmt(fpi["residual_G"]),
            1e-11 <= fpi["residual_G"] <= 1e-9,
        )
    )
    checks.append(
        Check(
            "FPI residual after 20000 iterations >= 3x the final one",
            "sublinear",
            f"{_fmt(witness)} vs {_fmt(fpi['residual_G'])}",
            witness >= 3.0 * fpi["residual_G"],
        )
    )
    return ExperimentResult(
        "example1", rows, EXAMPLE1_COLUMNS, checks, _failures(outcomes, "example1")
    )


def example2_runs(
    p_values: Sequence[int] = BenchConfig.EXAMPLE2_P, workers: int = BenchConfig.WORKERS
) -> Tuple[ExperimentResult, ExperimentResult]:
    """Residuals, iteration counts and timings for the CR variants at their iteration caps."""
    solvers = ("bscr", "scr", "cr")
    specs = [
        RunSpec(
            solver=solver,
            problem="example2",
            params={"p": p},
            tol=EXAMPLE2_TOL,
            require_gap=False,
        )
        for p in p_values
        for solver in solvers
    ]
    outcomes = run_many(specs, workers)
    residual_rows: List[Dict[str, Any]] = []
    time_rows: List[Dict[str, Any]] = []
    checks: List[Check] = []
    for i, p in enumerate(p_values):
        group = dict(zip(solvers, outcomes[3 * i : 3 * i + 3]))
        residual_rows.append({"p": p, **{f"residual_{s}": _residual(group[s]) for s in solvers}})
        time_row: Dict[str, Any] = {"p": p}
        time_row.update({f"iterations_{s}": _iterations(group[s]) for s in solvers})
        time_row.update({f"time_ms_{s}": _time_ms(group[s]) for s in solvers})
        time_rows.append(time_row)

        bscr, cr = _residual(group["bscr"]), _residual(group["cr"])
        checks.append(
            Check(
                f"p={p}: BS-CR residual <= 1e-12, CR residual >= 10x BS-CR",
                "~1e-15 vs ~1e-8",
                f"{_fmt(bscr)} vs {_fmt(cr)}",
                bscr <= 1e-12 and cr >= 10.0 * bscr,
            )
        )
    failures = _failures(outcomes, "example2")
    return (
        ExperimentResult(
            "example2_residuals", residual_rows, EXAMPLE2_RESIDUAL_COLUMNS, checks, failures
        ),
        ExperimentResult("example2_time_iters", time_rows, EXAMPLE2_TIME_COLUMNS),
    )


def example3_table(
    m_values: Sequence[int] = BenchConfig.EXAMPLE3_M,
    cases: Sequence[int] = BenchConfig.EXAMPLE3_CASES,
    seed: int = BenchConfig.SEED,
    workers: int = BenchConfig.WORKERS,
) -> ExperimentResult:
    """BS-CR against CR on Example 3.

    CR stops at residual 1e-7 or the iteration cap; BS-CR stops at the first step whose
    assembled solution has residual 1e-8.
    """
    grid = [(m, case) for m in m_values for case in cases]
    specs: List[RunSpec] = []
    for m, case in grid:
        params = {"m": m, "case": case}
        specs.append(
            RunSpec(
                solver="bscr",
                problem="example3",
                params=params,
                seed=seed,
                tol=BenchConfig.EXAMPLE3_BSCR_TOL,
                stop=BenchConfig.EXAMPLE3_STOP,
            )
        )
        specs.append(RunSpec(solver="cr", problem="example3", params=params, seed=seed))
    outcomes = run_many(specs, workers)
    rows: List[Dict[str, Any]] = []
    checks: List[Check] = []
    for i, (m, case) in enumerate(grid):
        bscr, cr = outcomes[2 * i], outcomes[2 * i + 1]
        rows.append(
            {
                "m": m,
                "case": case,
                "iterations_bscr": _iterations(bscr),
                "residual_bscr": _residual(bscr),
                "converged_bscr": _converged(bscr),
                "iterations_cr": _iterations(cr),
                "residual_cr": _residual(cr),
                "converged_cr": _converged(cr),
            }
        )
        reference = REFERENCE_EXAMPLE3.get((m, case))
        reference_bscr = f"{reference[0]}, {reference[1]:.2e}" if reference else "–"
        iters = _iterations(bscr)
        checks.append(
            Check(
                f"m={m} case {case}: BS-CR iterations <= 6 and residual <= 1e-8",
                reference_bscr,
                f"{iters}, {_fmt(_residual(bscr))}",
                bscr.ok and iters is not None and iters <= 6 and _residual(bscr) <= 1e-8,
            )
        )
        if case == 3:
            reference_cr = f"–, {reference[3]:.2e}" if reference else "–"
            checks.append(
                Check(
                    f"m={m} case 3: CR does not reach 1e-7 within 100 iterations",
                    reference_cr,
                    f"{_iterations(cr)}, {_fmt(_residual(cr))}",
                    not _converged(cr),
                )
            )
    return ExperimentResult(
        "example3", rows, EXAMPLE3_COLUMNS, checks, _failures(outcomes, "example3")
    )


def summary_markdown(results: Sequence[ExperimentResult]) -> str:
    lines = ["# Benchmark reproduction", ""]
    total = sum(len(r.checks) for r in results)
    passed = sum(c.passed for r in results for c in r.checks)
    lines.append(f"{passed} of {total} checks passed.")
    lines.append("")
    for result in results:
        lines.append(f"## {result.name}")
        lines.append("")
        lines.append(markdown_table(result.rows, result.columns))
        if result.checks:
            check_rows = [
                {
                    "check": c.name,
                    "reference": c.reference,
                    "measured": c.measured,
                    "status": "pass" if c.passed else "FAIL",
                }
                for c in result.checks
            ]
            lines.append(markdown_table(check_rows))
        for failure in result.failures:
            lines.append(
                f"- {failure.get('solver')} on {failure.get('problem')} {failure.get('params')}: "
                f"{failure.get('error')} ({failure.get('message')})"
            )
        lines.append("")
    return "\n".join(lines)


def reproduce_all(
    outdir: PathLike,
    workers: int = BenchConfig.WORKERS,
    p_values: Sequence[int] = BenchConfig.EXAMPLE2_P,
    m_values: Sequence[int] = BenchConfig.EXAMPLE3_M,
    seed: int = BenchConfig.SEED,
) -> Dict[str, Any]:
    """Write the four experiment CSVs and summary.md; return the check totals."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    results: List[ExperimentResult] = []

    ex1 = example1_table(workers)
    write_file(ex1.rows, out / "example1_table.csv", "csv", ex1.columns)
    results.append(ex1)

    residuals, times = example2_runs(p_values, workers)
    write_file(residuals.rows, out / "example2_residuals.csv", "csv", residuals.columns)
    write_file(times.rows, out / "example2_time_iters.csv", "csv", times.columns)
    results.extend([residuals, times])

    ex3 = example3_table(m_values, seed=seed, workers=workers)
    write_file(ex3.rows, out / "example3_table.csv", "csv", ex3.columns)
    results.append(ex3)

    (out / "summary.md").write_text(summary_markdown(results), encoding="utf-8")
    checks = [c for r in results for c in r.checks]
    summary = {
        "outdir": str(out),
        "checks": len(checks),
        "passed": sum(c.passed for c in checks),
        "failed": [c.name for c in checks if not c.passed],
        "solver_failures": sum(len(r.failures) for r in results),
    }
    logger.info(f"Reproduction finished: {summary['passed']}/{summary['checks']} checks passed")
    return summary


EXPERIMENTS = ("example1", "example2", "example3")
