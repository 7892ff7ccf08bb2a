"""Block shifts of a quadratic matrix polynomial.

A right shift (V2, S2, Y) with A0 V2 + A1 V2 S2 + A2 V2 S2^2 = 0 moves the eigenvalues of
S2 to zero. A left shift (U1, S1, X) with

    S1^{-2} U1 A0 + S1^{-1} U1 A1 + U1 A2 = 0

moves the eigenvalues of S1 to infinity. The minimal solutions transform as
G~ = G - V2 S2 Y and R~ = R - X S1^{-1} U1.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.errors import DimensionMismatch, SpecViolation
from src.linalg.kernels import LuFactor, as_matrix, factorize, norm_inf
from src.matpoly.polynomial import QuadMatrixPolynomial

logger = logging.getLogger(__name__)

BIORTHOGONALITY_TOL = 1e-10
HYPOTHESIS_TOL = 1e-8


@dataclass(frozen=True)
class ShiftSpec:
    """Left data (U1, S1, X) and/or right data (V2, S2, Y) of a block shift."""

    q: int
    U1: Optional[np.ndarray] = None
    S1: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None
    V2: Optional[np.ndarray] = None
    S2: Optional[np.ndarray] = None
    Y: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        left = [self.U1, self.S1, self.X]
        right = [self.V2, self.S2, self.Y]
        if any(v is not None for v in left) and not all(v is not None for v in left):
            raise DimensionMismatch("left shift needs U1, S1 and X together")
        if any(v is not None for v in right) and not all(v is not None for v in right):
            raise DimensionMismatch("right shift needs V2, S2 and Y together")
        if not (self.has_left or self.has_right):
            raise DimensionMismatch("a shift needs left data, right data or both")
        for name in ("U1", "S1", "X", "V2", "S2", "Y"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, as_matrix(value, name))

        q = self.q
        if self.has_left:
            m = self.U1.shape[1]
            self._expect_shape("U1", (q, m))
            self._expect_shape("S1", (q, q))
            self._expect_shape("X", (m, q))
            defect = norm_inf(self.U1 @ self.X - np.eye(q))
            if defect > BIORTHOGONALITY_TOL:
                raise SpecViolation(f"U1 X differs from I by {defect:.3e}", defect)
        if self.has_right:
            m = self.V2.shape[0]
            self._expect_shape("V2", (m, q))
            self._expect_shape("S2", (q, q))
            self._expect_shape("Y", (q, m))
            defect = norm_inf(self.Y @ self.V2 - np.eye(q))
            if defect > BIORTHOGONALITY_TOL:
                raise SpecViolation(f"Y V2 differs from I by {defect:.3e}", defect)
        if not 1 <= q < self.m:
            raise DimensionMismatch(f"block size q={q} must satisfy 1 <= q < m={self.m}")

    def _expect_shape(self, name: str, shape: Tuple[int, int]) -> None:
        actual = getattr(self, name).shape
        if actual != shape:
            raise DimensionMismatch(f"{name} has shape {actual}, expected {shape}")

    @classmethod
    def right(cls, V2: np.ndarray, S2: np.ndarray, Y: np.ndarray) -> "ShiftSpec":
        V2 = as_matrix(V2, "V2")
        return cls(q=V2.shape[1], V2=V2, S2=S2, Y=Y)

    @classmethod
    def left(cls, U1: np.ndarray, S1: np.ndarray, X: np.ndarray) -> "ShiftSpec":
        U1 = as_matrix(U1, "U1")
        return cls(q=U1.shape[0], U1=U1, S1=S1, X=X)

    @property
    def has_left(self) -> bool:
        return self.U1 is not None

    @property
    def has_right(self) -> bool:
        return self.V2 is not None

    @property
    def m(self) -> int:
        return int(self.U1.shape[1] if self.has_left else self.V2.shape[0])

    def s1_factor(self) -> LuFactor:
        return factorize(self.S1, "S1")


def _check_right_hypothesis(P: QuadMatrixPolynomial, spec: ShiftSpec) -> float:
    V2, S2 = spec.V2, spec.S2
    defect = norm_inf(P.A0 @ V2 + P.A1 @ V2 @ S2 + P.A2 @ V2 @ S2 @ S2)
    s = norm_inf(S2)
    scale = norm_inf(V2) * (norm_inf(P.A0) + s * norm_inf(P.A1) + s * s * norm_inf(P.A2))
    return defect / scale if scale > 0 else defect


def _check_left_hypothesis(P: QuadMatrixPolynomial, spec: ShiftSpec, lu: LuFactor) -> float:
    U1 = spec.U1
    defect = norm_inf(lu.solve(lu.solve(U1 @ P.A0) + U1 @ P.A1) + U1 @ P.A2)
    s = norm_inf(lu.solve(np.eye(spec.q)))
    scale = norm_inf(U1) * (s * s * norm_inf(P.A0) + s * norm_inf(P.A1) + norm_inf(P.A2))
    return defect / scale if scale > 0 else defect


def block_shift(P: QuadMatrixPolynomial, spec: ShiftSpec) -> QuadMatrixPolynomial:
    """Coefficients of the shifted polynomial.

    A0~ = A0 - A0 V2 Y
    A1~ = A1 + A2 V2 S2 Y + X S1^{-1} U1 A0~
    A2~ = A2 - X U1 A2
    Terms of a missing side are dropped.
    """
    if spec.m != P.m:
        raise DimensionMismatch(f"shift is for m={spec.m}, polynomial has m={P.m}")
    A0, A1, A2 = P.coefficients
    A0t, A1t, A2t = A0, A1, A2

    if spec.has_right:
        defect = _check_right_hypothesis(P, spec)
        if defect > HYPOTHESIS_TOL:
            logger.error(f"Right shift data violates A(S2) V2 = 0 (defect {defect:.3e})")
            raise SpecViolation(f"right shift hypothesis fails (defect {defect:.3e})", defect)
        A0t = A0 - (A0 @ spec.V2) @ spec.Y
        A1t = A1t + (A2 @ spec.V2 @ spec.S2) @ spec.Y

    if spec.has_left:
        lu = spec.s1_factor()
        defect = _check_left_hypothesis(P, spec, lu)
        if defect > HYPOTHESIS_TOL:
            logger.error(f"Left shift data violates U1 A(S1) = 0 (defect {defect:.3e})")
            raise SpecViolation(f"left shift hypothesis fails (defect {defect:.3e})", defect)
        A2t = A2 - spec.X @ (spec.U1 @ A2)
        A1t = A1t + spec.X @ lu.solve(spec.U1 @ A0t)

    shifted = QuadMatrixPolynomial(A0t, A1t, A2t)
    _check_annihilation(P, shifted, spec)
    return shifted


def _check_annihilation(
    P: QuadMatrixPolynomial, shifted: QuadMatrixPolynomial, spec: ShiftSpec
) -> None:
    if spec.has_left:
        defect = norm_inf(spec.U1 @ shifted.A2) / (norm_inf(P.A2) or 1.0)
        if defect > HYPOTHESIS_TOL:
            raise SpecViolation(f"U1 A2~ does not vanish ({defect:.3e})", defect)
    if spec.has_right:
        defect = norm_inf(shifted.A0 @ spec.V2) / (norm_inf(P.A0) or 1.0)
        if defect > HYPOTHESIS_TOL:
            raise SpecViolation(f"A0~ V2 does not vanish ({defect:.3e})", defect)


def shifted_solutions(
    G: Optional[np.ndarray], R: Optional[np.ndarray], spec: ShiftSpec
) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """G~ = G - V2 S2 Y and R~ = R - X S1^{-1} U1; a side without shift data is returned as is."""
    G_shifted, R_shifted = G, R
    if G is not None and spec.has_right:
        G = np.asarray(G)
        defect = norm_inf(G @ spec.V2 - spec.V2 @ spec.S2)
        scale = norm_inf(spec.V2) * (norm_inf(G) + norm_inf(spec.S2)) or 1.0
        if defect / scale > HYPOTHESIS_TOL:
            raise SpecViolation(f"G V2 != V2 S2 (defect {defect / scale:.3e})", defect / scale)
        G_shifted = G - spec.V2 @ spec.S2 @ spec.Y
    if R is not None and spec.has_left:
        R = np.asarray(R)
        lu = spec.s1_factor()
        s1_inv_u1 = lu.solve(spec.U1)
        defect = norm_inf(spec.U1 @ R - s1_inv_u1)
        scale = norm_inf(spec.U1) * norm_inf(R) + norm_inf(s1_inv_u1) or 1.0
        if defect / scale > HYPOTHESIS_TOL:
            raise SpecViolation(
                f"U1 R != S1^(-1) U1 (defect {defect / scale:.3e})", defect / scale
            )
        R_shifted = R - spec.X @ s1_inv_u1
    return G_shifted, R_shifted


def qbd_unit_shift(P: QuadMatrixPolynomial) -> Tuple[QuadMatrixPolynomial, ShiftSpec]:
    """Move the known eigenvalue 1 of G (eigenvector of all ones) to zero."""
    P.check_qbd()
    m = P.m
    spec = ShiftSpec.right(V2=np.ones((m, 1)), S2=np.ones((1, 1)), Y=np.full((1, m), 1.0 / m))
    return block_shift(P, spec), spec
