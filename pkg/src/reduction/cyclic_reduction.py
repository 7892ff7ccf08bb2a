"""Cyclic reduction for A0 + A1 X + A2 X^2 = 0.

One step maps (A0, A1, A2, A1hat) to

    A0' = -A0 A1^{-1} A0
    A1' = A1 - A0 A1^{-1} A2 - A2 A1^{-1} A0
    A2' = -A2 A1^{-1} A2
    A1hat' = A1hat - A2 A1^{-1} A0

which squares the eigenvalues of the matrix polynomial. The approximations
G_k = -A1hat^{-1} A0 and R_k = -A2 A1hat^{-1} converge to the minimal solutions when the
spectrum splits across the unit circle.
"""
import logging
import time
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from src.errors import Breakdown, SingularMatrix
from src.linalg.kernels import factorize, norm_inf
from src.matpoly.polynomial import QuadMatrixPolynomial, SolutionPair, residual_G
from src.matpoly.report import SolveReport

logger = logging.getLogger(__name__)

POWER_NORM_LIMIT = 1e12


@dataclass(frozen=True)
class CRState:
    A0k: np.ndarray
    A1k: np.ndarray
    A2k: np.ndarray
    A1hat_k: np.ndarray
    k: int = 0

    @classmethod
    def initial(cls, P: QuadMatrixPolynomial) -> "CRState":
        return cls(P.A0, P.A1, P.A2, P.A1, 0)

    def polynomial(self) -> QuadMatrixPolynomial:
        """The reduced polynomial A0k + z A1k + z^2 A2k."""
        return QuadMatrixPolynomial(self.A0k, self.A1k, self.A2k)


def cr_step(s: CRState) -> CRState:
    """Advance the cyclic reduction state by one step."""
    try:
        lu = factorize(s.A1k, f"A1 at step {s.k}")
    except SingularMatrix as err:
        raise Breakdown(
            f"cyclic reduction broke down at step {s.k} (rcond={err.rcond:.3e})",
            step=s.k,
            rcond=err.rcond,
        ) from err
    # one factorization, two block solves
    X0 = lu.solve(s.A0k)
    X2 = lu.solve(s.A2k)
    return CRState(
        A0k=-s.A0k @ X0,
        A1k=s.A1k - s.A0k @ X2 - s.A2k @ X0,
        A2k=-s.A2k @ X2,
        A1hat_k=s.A1hat_k - s.A2k @ X0,
        k=s.k + 1,
    )


def approximations(s: CRState, P: QuadMatrixPolynomial) -> SolutionPair:
    """G_k = -A1hat^{-1} A0 and R_k = -A2 A1hat^{-1}."""
    try:
        lu = factorize(s.A1hat_k, f"A1hat at step {s.k}")
    except SingularMatrix as err:
        raise Breakdown(
            f"A1hat is singular at step {s.k} (rcond={err.rcond:.3e})",
            step=s.k,
            rcond=err.rcond,
        ) from err
    return SolutionPair(G=-lu.solve(P.A0), R=-lu.solve_right(np.asarray(P.A2)))


def run_cyclic_reduction(
    P: QuadMatrixPolynomial,
    tol: float,
    kmax: int,
    solver: str = "cr",
    measure: Optional[Callable[[SolutionPair], float]] = None,
) -> Tuple[SolutionPair, SolveReport, CRState]:
    """Iterate `cr_step` on P until `measure(G_k, R_k) <= tol` or kmax steps.

    `measure` defaults to residual_G against P; the shifted solver passes its own so
    that the stopping test is taken on the un-shifted problem.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if kmax < 1:
        raise ValueError(f"kmax must be at least 1, got {kmax}")
    measure = measure or (lambda pair: residual_G(P, pair.G))

    report = SolveReport(solver=solver, m=P.m)
    history: List[Tuple[int, float]] = []
    report.diagnostics["residual_history"] = history
    state = CRState.initial(P)
    pair: Optional[SolutionPair] = None
    start = time.perf_counter()
    logger.info(f"Starting {solver} on m={P.m} (tol={tol:.1e}, kmax={kmax})")
    try:
        while state.k < kmax:
            state = cr_step(state)
            pair = approximations(state, P)
            residual = measure(pair)
            history.append((state.k, residual))
            logger.debug(f"{solver} step {state.k}: residual {residual:.3e}")
            if residual <= tol:
                report.converged = True
                break
    except Breakdown as err:
        report.iterations = state.k
        report.wall_time = time.perf_counter() - start
        if history:
            report.residual_G = history[-1][1]
        err.report = report
        logger.error(f"{solver} stopped: {err}")
        raise
    report.iterations = state.k
    report.wall_time = time.perf_counter() - start
    report.residual_G = history[-1][1]
    assert pair is not None
    logger.info(
        f"{solver} finished after {state.k} steps, residual {report.residual_G:.3e}, "
        f"converged={report.converged}"
    )
    return pair, report, state


def cr_solve(
    P: QuadMatrixPolynomial, tol: float = 1e-7, kmax: int = 100
) -> Tuple[SolutionPair, SolveReport, CRState]:
    """Plain cyclic reduction with residual-based stopping."""
    P.require_regular()
    pair, report, state = run_cyclic_reduction(P, tol, kmax, solver="cr")
    report.record_residuals(P, pair)
    return pair, report, state


class CRIdentityResiduals(NamedTuple):
    """Norms of the four identities linking the step-k coefficients to G and R."""

    g_reduced: float
    r_reduced: float
    g_hat: float
    r_hat: float

    def max(self) -> float:
        return max(self)


def _doubling_powers(X: np.ndarray, k: int) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """(X^(2^k), X^(2^(k+1))) by repeated squaring; None once the norm exceeds the limit."""
    power = X.copy()
    for _ in range(k):
        power = power @ power
        if norm_inf(power) > POWER_NORM_LIMIT:
            return None, None
    square = power @ power
    if norm_inf(square) > POWER_NORM_LIMIT:
        return power, None
    return power, square


def check_cr_identities(
    s: CRState, P: QuadMatrixPolynomial, G: np.ndarray, R: np.ndarray
) -> CRIdentityResiduals:
    """Residuals of

        A0k + A1k G^(2^k) + A2k G^(2^(k+1)) = 0
        R^(2^(k+1)) A0k + R^(2^k) A1k + A2k = 0
        A0 + A1hat_k G + A2k G^(2^k + 1) = 0
        A2 + R A1hat_k + R^(2^k + 1) A0k = 0

    A residual is reported as infinity when the required power of G or R overflows.
    """
    G = np.asarray(G)
    R = np.asarray(R)
    g_pow, g_pow2 = _doubling_powers(G, s.k)
    r_pow, r_pow2 = _doubling_powers(R, s.k)
    inf = float("inf")
    if g_pow is None or r_pow is None:
        logger.warning(f"power of G or R exceeds {POWER_NORM_LIMIT:.0e} at step {s.k}")

    g_reduced = (
        norm_inf(s.A0k + s.A1k @ g_pow + s.A2k @ g_pow2)
        if g_pow is not None and g_pow2 is not None
        else inf
    )
    r_reduced = (
        norm_inf(r_pow2 @ s.A0k + r_pow @ s.A1k + s.A2k)
        if r_pow is not None and r_pow2 is not None
        else inf
    )
    g_hat = norm_inf(P.A0 + s.A1hat_k @ G + s.A2k @ (g_pow @ G)) if g_pow is not None else inf
    r_hat = norm_inf(P.A2 + R @ s.A1hat_k + (r_pow @ R) @ s.A0k) if r_pow is not None else inf
    return CRIdentityResiduals(g_reduced, r_reduced, g_hat, r_hat)
