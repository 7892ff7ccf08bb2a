"""Solver dispatch for the benchmark harness."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from src.baselines.fpi import BaselineConfig, fpi_solve
from src.baselines.scr import scr_solve
from src.bench.config import BenchConfig, RunSpec
from src.bscr.driver import bscr_solve
from src.errors import ConfigError, NotQBD, QmeError
from src.matpoly.io import load_bundle, load_polynomial
from src.matpoly.polynomial import QuadMatrixPolynomial, SolutionPair
from src.matpoly.report import SolveReport
from src.problems.suite import ProblemInstance, builtin_instance
from src.reduction.cyclic_reduction import cr_solve

logger = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    """Result of one run; exactly one of `report` and `error` is set."""

    spec: RunSpec
    report: Optional[SolveReport] = None
    error: Optional[QmeError] = None
    pair: Optional[SolutionPair] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_record(self) -> Dict[str, Any]:
        if self.report is not None:
            return self.report.to_record()
        assert self.error is not None
        record = self.error.to_record()
        record["solver"] = self.spec.solver
        return record


def load_instance(spec: RunSpec) -> ProblemInstance:
    """Builtin generator or files named by the spec."""
    if spec.problem is not None:
        params = dict(spec.params)
        params.setdefault("seed", spec.seed)
        return builtin_instance(spec.problem, **params)
    try:
        if len(spec.paths) == 1:
            P = load_bundle(spec.paths[0])
        else:
            P = load_polynomial(spec.paths)
    except OSError as err:
        raise ConfigError(f"cannot read input: {err}") from err
    return ProblemInstance(polynomial=P, ell=spec.ell or 0, label=str(spec.paths[0]))


def solve(
    P: QuadMatrixPolynomial, spec: RunSpec, ell: Optional[int] = None
) -> Tuple[SolutionPair, SolveReport]:
    """Dispatch one solver on P with the tolerances carried by spec."""
    kmax = spec.max_iter
    if spec.solver == "bscr":
        bscr_ell = spec.ell if spec.ell is not None else ell
        if bscr_ell is None:
            raise ConfigError("bscr needs ell")
        return bscr_solve(
            P,
            bscr_ell,
            eps=spec.eps,
            kmax=kmax,
            tol=spec.tol,
            require_gap=spec.require_gap,
            stop=spec.stop,
        )
    if spec.solver == "cr":
        pair, report, _ = cr_solve(P, tol=spec.tol, kmax=kmax)
        return pair, report
    cfg = BaselineConfig(tol=spec.tol, kmax=kmax, check_every=BenchConfig.FPI_CHECK_EVERY)
    if spec.solver == "scr":
        return scr_solve(P, cfg)
    if spec.solver == "fpi":
        return fpi_solve(P, cfg)
    raise ConfigError(f"unknown solver {spec.solver!r}")


def run(spec: RunSpec) -> RunOutcome:
    """Validate, load and solve. Configuration problems raise; solver failures are captured."""
    BenchConfig.validate(spec)
    instance = load_instance(spec)
    P = instance.polynomial
    if spec.solver == "scr":
        try:
            P.check_qbd()
        except NotQBD as err:
            raise ConfigError(f"scr requires QBD input: {err}", err.diagnostics) from err

    ell = spec.ell if spec.ell is not None else (instance.ell or None)
    try:
        pair, report = solve(P, spec, ell)
    except ConfigError:
        raise
    except QmeError as err:
        logger.error(f"{spec.solver} failed on {instance.label}: {err}")
        return RunOutcome(spec=spec, error=err)

    report.ell = ell
    if "case" in instance.params:
        report.case = str(instance.params["case"])
    report.diagnostics["problem"] = instance.label
    return RunOutcome(spec=spec, report=report, pair=pair)


def run_many(
    specs: Sequence[RunSpec],
    workers: int = BenchConfig.WORKERS,
    runner: Callable[[RunSpec], RunOutcome] = run,
) -> List[RunOutcome]:
    """Run specs on a thread pool; outcomes come back in spec order."""
    if workers < 1:
        raise ConfigError(f"workers must be at least 1, got {workers}")
    if workers == 1:
        return [runner(spec) for spec in specs]
    logger.info(f"Running {len(specs)} jobs on {workers} worker threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(runner, specs))
