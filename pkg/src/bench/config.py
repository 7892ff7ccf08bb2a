"""Benchmark harness configuration."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.bscr.driver import STOP_RULES
from src.errors import ConfigError
from src.reduction.subspace import DEFAULT_EPS

SOLVERS = ("bscr", "cr", "scr", "fpi")
FORMATS = ("csv", "json", "md")


class BenchConfig:
    """Default settings for the solvers and the reproduced experiments."""

    # Solver defaults
    TOL = 1e-7
    MAX_ITER = {"cr": 100, "scr": 100, "bscr": 12, "fpi": 200000}
    EPS = DEFAULT_EPS
    STOP = "gap"
    FPI_CHECK_EVERY = 100

    # Harness settings
    SEED = 0
    WORKERS = 1
    FORMAT = "json"

    # Experiment grids
    EXAMPLE2_P = (4, 8, 16, 32, 64)
    EXAMPLE3_M = (16, 32, 64, 128)
    EXAMPLE3_CASES = (1, 2, 3)
    # BS-CR on Example 3 stops on the residual rather than the gap test
    EXAMPLE3_STOP = "residual"
    EXAMPLE3_BSCR_TOL = 1e-8
    FPI_WITNESS_ITER = 20000

    @classmethod
    def max_iter(cls, solver: str) -> int:
        return cls.MAX_ITER[solver]

    @classmethod
    def validate(cls, spec: "RunSpec") -> None:
        """Raise ConfigError when the run cannot be started as specified."""
        problems = []
        if spec.solver not in SOLVERS:
            problems.append(f"unknown solver {spec.solver!r} (choose from {', '.join(SOLVERS)})")
        if spec.solver == "bscr" and spec.ell is None and spec.problem is None:
            problems.append("bscr needs --ell")
        if spec.ell is not None and spec.ell < 1:
            problems.append(f"ell must be positive, got {spec.ell}")
        if not spec.tol > 0:
            problems.append(f"tol must be positive, got {spec.tol}")
        if spec.kmax is not None and spec.kmax < 1:
            problems.append(f"max-iter must be at least 1, got {spec.kmax}")
        if spec.stop not in STOP_RULES:
            problems.append(
                f"unknown stop rule {spec.stop!r} (choose from {', '.join(STOP_RULES)})"
            )
        if spec.fmt not in FORMATS:
            problems.append(f"unknown format {spec.fmt!r} (choose from {', '.join(FORMATS)})")
        if spec.problem is None and not spec.paths:
            problems.append("no problem given: pass a builtin problem, a bundle or .mtx files")
        if spec.paths and len(spec.paths) not in (1, 3):
            problems.append(
                f"expected one bundle or three Matrix Market files, got {len(spec.paths)}"
            )

        if problems:
            raise ConfigError("; ".join(problems), {"problems": problems})


@dataclass(frozen=True)
class RunSpec:
    """One solver run as requested on the command line."""

    solver: str
    problem: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    paths: Tuple[Path, ...] = ()
    tol: float = BenchConfig.TOL
    kmax: Optional[int] = None
    ell: Optional[int] = None
    seed: int = BenchConfig.SEED
    eps: float = BenchConfig.EPS
    require_gap: bool = True
    stop: str = BenchConfig.STOP
    output: Optional[Path] = None
    fmt: str = BenchConfig.FORMAT

    @property
    def max_iter(self) -> int:
        return self.kmax if self.kmax is not None else BenchConfig.max_iter(self.solver)
