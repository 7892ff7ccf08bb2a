"""Shifted cyclic reduction for QBD problems.

The eigenvalue 1 of G (eigenvector of all ones) is moved to zero, cyclic reduction runs
on the shifted polynomial and the shift is undone with G = G~ + 1 1^T / m.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from src.baselines.fpi import BaselineConfig
from src.matpoly.polynomial import (
    QuadMatrixPolynomial,
    SolutionPair,
    recover_R_from_G,
    residual_G,
)
from src.matpoly.report import SolveReport
from src.reduction.cyclic_reduction import run_cyclic_reduction
from src.reduction.shift_deflate import ShiftSpec, qbd_unit_shift

logger = logging.getLogger(__name__)


def unshift_G(G_shifted: np.ndarray, spec: ShiftSpec) -> np.ndarray:
    """Inverse of G~ = G - V2 S2 Y."""
    return G_shifted + spec.V2 @ spec.S2 @ spec.Y


def scr_solve(
    P: QuadMatrixPolynomial, cfg: Optional[BaselineConfig] = None
) -> Tuple[SolutionPair, SolveReport]:
    cfg = cfg or BaselineConfig()
    P.require_regular()
    shifted, spec = qbd_unit_shift(P)

    def original_residual(pair: SolutionPair) -> float:
        return residual_G(P, unshift_G(pair.G, spec))

    shifted_pair, report, _ = run_cyclic_reduction(
        shifted, cfg.tol, cfg.kmax, solver="scr", measure=original_residual
    )
    G = unshift_G(shifted_pair.G, spec)
    pair = SolutionPair(G=G, R=recover_R_from_G(P, G))
    report.record_residuals(P, pair)
    return pair, report
