"""Block-shifted cyclic reduction (BS-CR).

Stages: subspace extraction by cyclic reduction, deflation, the small unit-circle
equation, recovery of the off-diagonal blocks and reconstruction of G and R.
"""
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional, Tuple, TypeVar

import numpy as np

from src.bscr.deflation import (
    a122_consistency,
    assemble_deflated,
    deflated_residuals,
    reconstruct,
    recover_offdiagonal,
)
from src.bscr.small_qme import SmallQme, recover_Rbar11, reversed_residual, solve_small_detailed
from src.errors import NoGap, QmeError
from src.linalg.kernels import norm_inf
from src.matpoly.polynomial import QuadMatrixPolynomial, SolutionPair, residual_G, residual_R
from src.matpoly.report import SolveReport
from src.reduction.subspace import (
    DEFAULT_EPS,
    DEFAULT_KMAX,
    GapSnapshot,
    SubspaceBundle,
    bundle_from_snapshot,
    check_arguments,
    extract_subspaces,
    gap_snapshots,
    suggest_ell,
    validate_bundle,
)

logger = logging.getLogger(__name__)

IMAG_DISCARD_TOL = 1e-8
BUNDLE_DEFECT_TOL = 1e-6
STOP_RULES = ("gap", "residual")

T = TypeVar("T")


@dataclass
class BscrReport(SolveReport):
    subspace_iterations: int = 0
    gap_ratios: Tuple[float, float] = (float("nan"), float("nan"))
    small_qme_residual: float = float("nan")

    def to_record(self) -> dict:
        record = super().to_record()
        record["diagnostics"]["gap_ratios"] = [float(r) for r in self.gap_ratios]
        record["diagnostics"]["small_qme_residual"] = float(self.small_qme_residual)
        return record


def _stage(name: str, fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Run one stage, labelling any failure with the stage name."""
    try:
        return fn(*args, **kwargs)
    except QmeError as err:
        err.stage = name
        logger.error(f"BS-CR stage '{name}' failed: {err}")
        raise


def _drop_imaginary(
    pair: SolutionPair, report: BscrReport, tol: float = IMAG_DISCARD_TOL
) -> SolutionPair:
    """Return a real pair when the imaginary parts are negligible."""
    imag = max(norm_inf(np.imag(pair.G)), norm_inf(np.imag(pair.R)))
    scale = max(norm_inf(pair.G), norm_inf(pair.R)) or 1.0
    report.diagnostics["discarded_imaginary"] = imag
    if imag <= tol * scale:
        return SolutionPair(G=np.real(pair.G).copy(), R=np.real(pair.R).copy())
    logger.warning(
        f"Real input but solution has imaginary part {imag:.3e}; keeping complex result"
    )
    report.diagnostics["discarded_imaginary"] = 0.0
    report.diagnostics["kept_imaginary"] = imag
    return pair

def _plain(name: str, fn: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    return fn(*args, **kwargs)


def _assemble(
    P: QuadMatrixPolynomial, bundle: SubspaceBundle, report: BscrReport, labelled: bool = True
) -> SolutionPair:
    """Deflation, the small equation, the off-diagonal blocks and reconstruction."""
    stage = _stage if labelled else _plain
    checks = validate_bundle(P, bundle)
    bundle_defect = max(checks.g_polynomial_defect, checks.r_polynomial_defect) / (
        P.max_norm() or 1.0
    )
    report.diagnostics["bundle_defect"] = bundle_defect
    if labelled and bundle_defect > BUNDLE_DEFECT_TOL:
        logger.warning(f"Subspace bundle defect {bundle_defect:.3e} is large")

    deflated = stage("deflation", assemble_deflated, P, bundle)
    report.diagnostics["a122_rcond"] = deflated.A122_rcond
    report.diagnostics["a122_consistency"] = a122_consistency(P, bundle, deflated)

    small = SmallQme(deflated.B0, deflated.B1, deflated.B2)
    solution = stage("small_qme", solve_small_detailed, small)
    G11 = solution.G11
    report.small_qme_residual = solution.residual
    report.diagnostics["rcond_z11"] = solution.rcond_z11
    report.diagnostics["multiplicity_ok"] = solution.multiplicity_ok
    report.diagnostics["schur_formula_gap"] = solution.schur_formula_gap

    R11 = stage("recover_r11", recover_Rbar11, small, G11)
    report.diagnostics["small_qme_reversed_residual"] = reversed_residual(small, R11)
    G21, R12 = stage("offdiagonal", recover_offdiagonal, deflated, G11, R11)
    report.diagnostics["deflated_residuals"] = deflated_residuals(deflated, G11, G21, R11, R12)

    pair = reconstruct(bundle, G11, G21, R11, R12)
    if not P.is_complex:
        pair = _drop_imaginary(pair, report)
    return pair


def _search_on_residual(
    P: QuadMatrixPolynomial,
    ell: int,
    eps: float,
    kmax: int,
    tol: float,
    report: BscrReport,
) -> Tuple[SubspaceBundle, SolutionPair]:
    """Assemble a solution after every CR step and stop once both residuals reach tol."""
    check_arguments(P, ell, eps, kmax)
    last: Optional[GapSnapshot] = None
    for snapshot in gap_snapshots(P, ell, kmax):
        last = snapshot
        bundle = bundle_from_snapshot(P, snapshot, ell, snapshot.passes(eps))
        radius = max(
            bundle.diagnostics["Lambda_G1_spectral_radius"],
            bundle.diagnostics["Lambda_R1_spectral_radius"],
        )
        if radius >= 1.0:
            logger.debug(f"step {snapshot.k}: deflated spectral radius {radius:.3e}")
            continue
        try:
            pair = _assemble(P, bundle, report, labelled=False)
        except QmeError as err:
            logger.debug(f"step {snapshot.k}: no solution yet ({err})")
            continue
        worst = max(residual_G(P, pair.G), residual_R(P, pair.R))
        logger.debug(f"step {snapshot.k}: residual {worst:.3e}")
        if worst <= tol:
            logger.info(f"Residual {worst:.3e} reached after {snapshot.k} steps")
            return bundle, pair

    assert last is not None
    suggested = suggest_ell(last.sv0.singular_values)
    raise NoGap(
        f"residual did not reach {tol:.1e} within {kmax} steps for ell={ell}",
        gap_ratios=last.ratios,
        iterations=kmax,
        suggested_ell=suggested,
    )


def bscr_solve(
    P: QuadMatrixPolynomial,
    ell: int,
    eps: float = DEFAULT_EPS,
    kmax: int = DEFAULT_KMAX,
    tol: float = 1e-7,
    require_gap: bool = True,
    stop: str = "gap",
) -> Tuple[SolutionPair, BscrReport]:
    """Solve both equations for a polynomial with 2*ell eigenvalues on the unit circle.

    stop="gap" runs cyclic reduction until the singular value gap test passes with eps.
    stop="residual" assembles a solution after every step and returns the first whose
    residuals are both within tol.
    """
    if stop not in STOP_RULES:
        raise ValueError(f"stop must be one of {STOP_RULES}, got {stop!r}")
    report = BscrReport(solver="bscr", m=P.m, ell=ell)
    start = time.perf_counter()
    logger.info(
        f"Starting BS-CR on m={P.m}, ell={ell} (eps={eps:.1e}, kmax={kmax}, stop on {stop})"
    )
    _stage("input", P.require_regular)

    if stop == "gap":
        bundle = _stage("subspace", extract_subspaces, P, ell, eps, kmax, require_gap)
        pair = _assemble(P, bundle, report)
    else:
        bundle, pair = _stage("subspace", _search_on_residual, P, ell, eps, kmax, tol, report)
    report.subspace_iterations = report.iterations = bundle.iterations_used
    report.gap_ratios = bundle.gap_ratios
    report.diagnostics["gap_passed"] = bundle.diagnostics.get("gap_passed", True)
    report.diagnostics["stop"] = stop

    report.wall_time = time.perf_counter() - start
    report.record_residuals(P, pair)
    report.converged = report.residual_G <= tol
    logger.info(
        f"BS-CR finished: {report.subspace_iterations} CR steps, "
        f"residual_G {report.residual_G:.3e}, residual_R {report.residual_R:.3e}"
    )
    return pair, report
