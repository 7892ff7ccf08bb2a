"""U-based fixed-point iteration G <- -(A1 + A2 G)^{-1} A0."""
import logging
import time
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.linalg.kernels import factorize
from src.matpoly.polynomial import (
    QuadMatrixPolynomial,
    SolutionPair,
    recover_R_from_G,
    residual_G,
)
from src.matpoly.report import SolveReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineConfig:
    tol: float = 1e-7
    kmax: int = 100
    check_every: int = 100

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.kmax < 1:
            raise ValueError(f"kmax must be at least 1, got {self.kmax}")
        if self.check_every < 1:
            raise ValueError(f"check_every must be at least 1, got {self.check_every}")


def initial_guess(P: QuadMatrixPolynomial) -> np.ndarray:
    """Uniform stochastic matrix for QBD input, zero otherwise."""
    if P.is_qbd():
        return np.full((P.m, P.m), 1.0 / P.m)
    logger.warning("Input is not in QBD form; starting the fixed-point iteration from G0 = 0")
    return np.zeros((P.m, P.m), dtype=P.dtype)


def iterate_fpi(P: QuadMatrixPolynomial, G0: np.ndarray) -> Iterator[np.ndarray]:
    """Yield G1, G2, ... without end; SingularMatrix when A1 + A2 G loses rank."""
    A0, A1, A2 = P.coefficients
    G = np.asarray(G0)
    while True:
        G = -factorize(A1 + A2 @ G, "A1 + A2 G").solve(A0)
        yield G


def fpi_solve(
    P: QuadMatrixPolynomial,
    cfg: Optional[BaselineConfig] = None,
    initial: Optional[np.ndarray] = None,
) -> Tuple[SolutionPair, SolveReport]:
    """Fixed-point iteration with the residual checked every `cfg.check_every` steps."""
    cfg = cfg or BaselineConfig(kmax=200000)
    P.require_regular()
    G0 = initial_guess(P) if initial is None else np.asarray(initial)
    report = SolveReport(solver="fpi", m=P.m)
    history: List[Tuple[int, float]] = []
    report.diagnostics["residual_history"] = history
    start = time.perf_counter()
    logger.info(f"Starting FPI on m={P.m} (tol={cfg.tol:.1e}, kmax={cfg.kmax})")

    G = G0
    k = 0
    for k, G in enumerate(iterate_fpi(P, G0), start=1):
        if k % cfg.check_every == 0 or k == cfg.kmax:
            residual = residual_G(P, G)
            history.append((k, residual))
            logger.debug(f"fpi iteration {k}: residual {residual:.3e}")
            if residual <= cfg.tol:
                report.converged = True
                break
        if k >= cfg.kmax:
            break

    report.iterations = k
    pair = SolutionPair(G=G, R=recover_R_from_G(P, G))
    report.wall_time = time.perf_counter() - start
    report.record_residuals(P, pair)
    logger.info(f"FPI finished after {k} iterations, residual {report.residual_G:.3e}")
    return pair, report
