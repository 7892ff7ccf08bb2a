"""Quadratic matrix polynomials A(z) = A0 + z A1 + z^2 A2 and their residuals."""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.errors import DegeneratePolynomial, DimensionMismatch, NotQBD, SingularMatrix
from src.linalg.kernels import (
    EPS,
    INFINITE_TOL,
    as_square,
    factorize,
    generalized_schur,
    norm_inf,
    reciprocal_condition,
)

logger = logging.getLogger(__name__)

QBD_TOL = 1e-12


@dataclass(frozen=True)
class QuadMatrixPolynomial:
    """Immutable coefficient triple (A0, A1, A2) sharing size m and scalar field."""

    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray

    def __post_init__(self) -> None:
        coeffs = [as_square(c, f"A{i}") for i, c in enumerate((self.A0, self.A1, self.A2))]
        shapes = {c.shape for c in coeffs}
        if len(shapes) != 1:
            raise DimensionMismatch(f"coefficients have differing shapes: {sorted(shapes)}")
        dtype = np.result_type(*coeffs)
        for name, c in zip(("A0", "A1", "A2"), coeffs):
            arr = np.array(c, dtype=dtype)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_qbd(cls, E0: np.ndarray, E1: np.ndarray, E2: np.ndarray) -> "QuadMatrixPolynomial":
        """A0 = -E0, A1 = I - E1, A2 = -E2."""
        E1 = as_square(E1, "E1")
        return cls(-np.asarray(E0), np.eye(E1.shape[0]) - E1, -np.asarray(E2))

    @property
    def m(self) -> int:
        return int(self.A0.shape[0])

    @property
    def dtype(self) -> np.dtype:
        return self.A0.dtype

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.A0))

    @property
    def coefficients(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.A0, self.A1, self.A2

    def evaluate(self, z: complex) -> np.ndarray:
        return self.A0 + z * (self.A1 + z * self.A2)

    def norm_scale(self) -> float:
        """||A0|| + ||A1|| + ||A2|| in the infinity norm."""
        return sum(norm_inf(c) for c in self.coefficients)

    def max_norm(self) -> float:
        return max(norm_inf(c) for c in self.coefficients)

    def qbd_blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(E0, E1, E2) with A0 = -E0, A1 = I - E1, A2 = -E2."""
        return -self.A0, np.eye(self.m) - self.A1, -self.A2

    def check_qbd(self, tol: float = QBD_TOL) -> None:
        """Raise NotQBD unless E0, E1, E2 are nonnegative with rows of E0+E1+E2 summing to 1."""
        if self.is_complex and any(np.any(np.imag(c) != 0) for c in self.coefficients):
            raise NotQBD("QBD coefficients must be real")
        blocks = [np.real(e) for e in self.qbd_blocks()]
        most_negative = min(float(e.min()) for e in blocks)
        if most_negative < -tol:
            raise NotQBD(
                f"QBD blocks have a negative entry ({most_negative:.3e})",
                {"most_negative": most_negative},
            )
        row_defect = float(np.max(np.abs(sum(blocks).sum(axis=1) - 1.0)))
        if row_defect > tol:
            raise NotQBD(
                f"rows of E0+E1+E2 do not sum to 1 (defect {row_defect:.3e})",
                {"row_sum_defect": row_defect},
            )

    def is_qbd(self, tol: float = QBD_TOL) -> bool:
        try:
            self.check_qbd(tol)
        except NotQBD:
            return False
        return True

    def is_regular(self, rng: Optional[np.random.Generator] = None) -> bool:
        """Probabilistic test that det A(z) is not identically zero.

        A(z) is evaluated at three random points; the polynomial is declared degenerate when
        A(z) is numerically singular at all of them.
        """
        rng = rng if rng is not None else np.random.default_rng(0)
        radii = rng.uniform(0.5, 2.0, size=3)
        angles = rng.uniform(0.0, 2.0 * np.pi, size=3)
        threshold = 10.0 * self.m * EPS
        return any(
            reciprocal_condition(self.evaluate(r * np.exp(1j * t))) > threshold
            for r, t in zip(radii, angles)
        )

    def require_regular(self, rng: Optional[np.random.Generator] = None) -> None:
        if not self.is_regular(rng):
            raise DegeneratePolynomial("det A(z) vanishes at every sample point")


@dataclass(frozen=True)
class SolutionPair:
    G: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class SpectrumReport:
    """Finite eigenvalues sorted by modulus plus the number of infinite ones."""

    finite_eigenvalues: np.ndarray
    infinite_count: int

    @property
    def total(self) -> int:
        return len(self.finite_eigenvalues) + self.infinite_count

    def all_eigenvalues(self) -> np.ndarray:
        tail = np.full(self.infinite_count, complex(np.inf, 0.0))
        return np.concatenate([self.finite_eigenvalues, tail])

    def on_unit_circle(self, tol: float = 1e-6) -> np.ndarray:
        values = self.finite_eigenvalues
        return values[np.abs(np.abs(values) - 1.0) <= tol]


def _check_operand(P: QuadMatrixPolynomial, X: object, name: str) -> np.ndarray:
    X = as_square(X, name)
    if X.shape[0] != P.m:
        raise DimensionMismatch(f"{name} is {X.shape[0]}x{X.shape[0]}, polynomial has m={P.m}")
    return X


def residual_G(P: QuadMatrixPolynomial, X: object, relative: bool = False) -> float:
    """||A0 + (A1 + A2 X) X||_inf."""
    X = _check_operand(P, X, "X")
    value = norm_inf(P.A0 + (P.A1 + P.A2 @ X) @ X)
    return value / P.norm_scale() if relative else value


def residual_R(P: QuadMatrixPolynomial, Y: object, relative: bool = False) -> float:
    """||Y^2 A0 + Y A1 + A2||_inf."""
    Y = _check_operand(P, Y, "Y")
    value = norm_inf(Y @ (Y @ P.A0 + P.A1) + P.A2)
    return value / P.norm_scale() if relative else value


def linearize(B0: np.ndarray, B1: np.ndarray, B2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Companion pencil M = [[0, I], [-B0, -B1]], N = [[I, 0], [0, B2]]."""
    n = B0.shape[0]
    dtype = np.result_type(B0, B1, B2)
    eye, zero = np.eye(n, dtype=dtype), np.zeros((n, n), dtype=dtype)
    M = np.block([[zero, eye], [-B0, -B1]])
    N = np.block([[eye, zero], [zero, B2]])
    return M, N


def spectrum(P: QuadMatrixPolynomial, infinite_tol: float = INFINITE_TOL) -> SpectrumReport:
    """Eigenvalues of A(z) from the 2m x 2m companion pencil."""
    M, N = linearize(*P.coefficients)
    schur = generalized_schur(M, N)
    finite = []
    infinite = 0
    for alpha, beta in schur.eigenvalue_pairs:
        if abs(beta) <= infinite_tol * (abs(alpha) + abs(beta)):
            infinite += 1
        else:
            finite.append(alpha / beta)
    values = np.array(finite, dtype=np.complex128)
    values = values[np.argsort(np.abs(values), kind="stable")]
    return SpectrumReport(finite_eigenvalues=values, infinite_count=infinite)


def recover_R_from_G(P: QuadMatrixPolynomial, G: object) -> np.ndarray:
    """R = -A2 (A1 + A2 G)^{-1}."""
    G = _check_operand(P, G, "G")
    lu = factorize(P.A1 + P.A2 @ G, "A1 + A2 G")
    return -lu.solve_right(np.asarray(P.A2, dtype=np.result_type(P.A2, lu.lu)))


def gr_relation_defect(P: QuadMatrixPolynomial, G: np.ndarray, R: np.ndarray) -> float:
    """||R + A2 (A1 + A2 G)^{-1}|| / ||R||; infinite when A1 + A2 G is singular."""
    try:
        coupled = recover_R_from_G(P, G)
    except SingularMatrix:
        return float("inf")
    scale = norm_inf(R)
    defect = norm_inf(R - coupled)
    return defect / scale if scale > 0 else defect
