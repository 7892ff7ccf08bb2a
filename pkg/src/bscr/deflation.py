"""Deflated block system and reconstruction of G and R.

In the bases W_G and T_R the shifted coefficients become block triangular, the interior
eigenvalues are moved to 0 and infinity, and eliminating the (2,2) block A122 leaves the
ell x ell equation B0 + B1 X + B2 X^2 = 0.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.errors import SingularA122, SingularMatrix
from src.linalg.kernels import LuFactor, ctranspose, factorize, norm_inf
from src.matpoly.polynomial import QuadMatrixPolynomial, SolutionPair
from src.reduction.subspace import SubspaceBundle

logger = logging.getLogger(__name__)

A122_MIN_RCOND = 1e-12


@dataclass(frozen=True)
class DeflatedSystem:
    A011: np.ndarray
    A021: np.ndarray
    A111: np.ndarray
    A112: np.ndarray
    A121: np.ndarray
    A122: np.ndarray
    A211: np.ndarray
    A212: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    A122_lu: LuFactor

    @property
    def A122_rcond(self) -> float:
        return self.A122_lu.rcond

    @property
    def ell(self) -> int:
        return int(self.B0.shape[0])


def assemble_deflated(P: QuadMatrixPolynomial, b: SubspaceBundle) -> DeflatedSystem:
    """Blocks of the deflated coefficients and the condensed B0, B1, B2."""
    A0, A1, A2 = P.coefficients
    W2, W1, T2, T1 = b.W_G2, b.W_G1, b.T_R2, b.T_R1
    LG, LR = b.Lambda_G1, b.Lambda_R1

    coupled = A1 @ W1 + A2 @ W1 @ LG
    A011 = T2 @ A0 @ W2
    A021 = T1 @ A0 @ W2
    A111 = T2 @ A1 @ W2
    A112 = T2 @ coupled
    A121 = (T1 @ A1 + LR @ T1 @ A0) @ W2
    A122 = T1 @ coupled
    A211 = T2 @ A2 @ W2
    A212 = T2 @ A2 @ W1

    lu = factorize(A122, "A122", min_rcond=A122_MIN_RCOND, error_cls=SingularA122)
    # A122^{-1} applied once to each coupling block
    sol_021 = lu.solve(A021)
    sol_121 = lu.solve(A121)
    B0 = A011 - A112 @ sol_021
    B1 = A111 - A112 @ sol_121 - A212 @ sol_021
    B2 = A211 - A212 @ sol_121
    logger.debug(f"Deflated system assembled (ell={b.ell}, rcond(A122)={lu.rcond:.3e})")
    return DeflatedSystem(
        A011=A011,
        A021=A021,
        A111=A111,
        A112=A112,
        A121=A121,
        A122=A122,
        A211=A211,
        A212=A212,
        B0=B0,
        B1=B1,
        B2=B2,
        A122_lu=lu,
    )


def a122_consistency(
    P: QuadMatrixPolynomial, b: SubspaceBundle, d: DeflatedSystem
) -> Optional[float]:
    """||A122 + T1 A0 W1 Lambda_G1^{-1}|| / ||A0||, or None when Lambda_G1 is singular."""
    try:
        lam = factorize(b.Lambda_G1, "Lambda_G1")
    except SingularMatrix:
        return None
    other = lam.solve_right(b.T_R1 @ P.A0 @ b.W_G1)
    return norm_inf(d.A122 + other) / (norm_inf(P.A0) or 1.0)


def recover_offdiagonal(
    d: DeflatedSystem, G11: np.ndarray, R11: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """G21 = -A122^{-1}(A021 + A121 G11), R12 = -(A212 + R11 A112) A122^{-1}."""
    G21 = -d.A122_lu.solve(d.A021 + d.A121 @ G11)
    R12 = -d.A122_lu.solve_right(d.A212 + R11 @ d.A112)
    return G21, R12


def deflated_residuals(
    d: DeflatedSystem,
    G11: np.ndarray,
    G21: np.ndarray,
    R11: np.ndarray,
    R12: np.ndarray,
) -> Dict[str, float]:
    """Both block rows of the deflated G equation and of the deflated R equation."""
    g_row1 = d.A011 + d.A111 @ G11 + d.A112 @ G21 + (d.A211 @ G11 + d.A212 @ G21) @ G11
    g_row2 = d.A021 + d.A121 @ G11 + d.A122 @ G21
    r_col1 = d.A211 + R11 @ d.A111 + R12 @ d.A121 + R11 @ (R11 @ d.A011 + R12 @ d.A021)
    r_col2 = d.A212 + R11 @ d.A112 + R12 @ d.A122
    return {
        "g_first": norm_inf(g_row2),
        "g_second": norm_inf(g_row1),
        "r_first": norm_inf(r_col2),
        "r_second": norm_inf(r_col1),
    }


def reconstruct(
    b: SubspaceBundle,
    G11: np.ndarray,
    G21: np.ndarray,
    R11: np.ndarray,
    R12: np.ndarray,
) -> SolutionPair:
    """G = W2 G11 W2* + W1 G21 W2* + W1 L_G W1*, R = T2* R11 T2 + T2* R12 T1 + T1* L_R T1."""
    W2, W1, T2, T1 = b.W_G2, b.W_G1, b.T_R2, b.T_R1
    W2h, W1h, T2h, T1h = ctranspose(W2), ctranspose(W1), ctranspose(T2), ctranspose(T1)
    G = W2 @ G11 @ W2h + W1 @ G21 @ W2h + W1 @ b.Lambda_G1 @ W1h
    R = T2h @ R11 @ T2 + T2h @ R12 @ T1 + T1h @ b.Lambda_R1 @ T1
    return SolutionPair(G=G, R=R)
