"""Dense kernels: factorized solves, SVD, generalized Schur forms and norms.

Every other module goes through these wrappers so that singularity, convergence and
reordering problems surface as the package's own error types.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.linalg import LinAlgError, LinAlgWarning
from scipy.linalg.lapack import get_lapack_funcs

from src.errors import (
    ConvergenceFailure,
    DimensionMismatch,
    ReorderFailure,
    SchurFailure,
    SingularMatrix,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(np.float64).eps)
RCOND_WARN = 1e-12
INFINITE_TOL = 1e3 * EPS

Selector = Union[Callable[[complex], bool], Sequence[complex]]


def as_matrix(a: object, name: str = "matrix") -> np.ndarray:
    """Return a 2-D float64 or complex128 array."""
    arr = np.asarray(a)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    return arr.astype(np.float64, copy=False)


def as_square(a: object, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def ctranspose(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose (plain transpose for real arrays)."""
    return a.conj().T


def norm_inf(a: np.ndarray) -> float:
    """Maximum absolute row sum."""
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=1).max())


def norm_1(a: np.ndarray) -> float:
    """Maximum absolute column sum."""
    if a.size == 0:
        return 0.0
    return float(np.abs(a).sum(axis=0).max())


def _rcond_from_lu(lu: np.ndarray, anorm: float) -> float:
    if anorm == 0.0 or not np.all(np.diag(lu) != 0):
        return 0.0
    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond):
        return 0.0
    return float(rcond)


@dataclass(frozen=True)
class LuFactor:
    """LU factors of a square matrix with its 1-norm reciprocal condition estimate."""

    lu: np.ndarray
    piv: np.ndarray
    rcond: float

    @property
    def n(self) -> int:
        return int(self.lu.shape[0])

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve A X = B."""
        b = np.asarray(b)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        return scipy.linalg.lu_solve((self.lu, self.piv), b, check_finite=False)

    def solve_right(self, b: np.ndarray) -> np.ndarray:
        """Solve X A = B."""
        b = np.asarray(b)
        if b.ndim != 2 or b.shape[1] != self.n:
            raise DimensionMismatch(f"left-hand side has shape {b.shape}, expected (*, {self.n})")
        return scipy.linalg.lu_solve((self.lu, self.piv), b.T, trans=1, check_finite=False).T


def factorize(
    a: object,
    name: str = "matrix",
    min_rcond: float = EPS,
    error_cls: type = SingularMatrix,
) -> LuFactor:
    """LU-factorize `a`, raising `error_cls` when rcond falls below `min_rcond`."""
    a = as_square(a, name)
    anorm = norm_1(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    rcond = _rcond_from_lu(lu, anorm)
    if not rcond >= min_rcond:
        logger.error(f"{name} is singular to working precision (rcond={rcond:.3e})")
        raise error_cls(f"{name} is singular to working precision (rcond={rcond:.3e})", rcond)
    if rcond < RCOND_WARN:
        logger.warning(f"{name} is badly conditioned (rcond={rcond:.3e})")
    return LuFactor(lu=lu, piv=piv, rcond=rcond)


def lu_solve(a: object, b: object) -> np.ndarray:
    """Solve A X = B through a pivoted LU factorization; no inverse is formed."""
    return factorize(a).solve(np.asarray(b))


def reciprocal_condition(a: object) -> float:
    """1-norm reciprocal condition estimate; 0.0 for exactly singular input."""
    a = as_square(a)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(a, check_finite=False)
    return _rcond_from_lu(lu, norm_1(a))


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    singular_values: np.ndarray
    Vh: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return ctranspose(self.Vh)


def svd(a: object) -> SvdResult:
    """Full SVD, singular values non-increasing."""
    a = as_matrix(a)
    try:
        u, s, vh = scipy.linalg.svd(a, lapack_driver="gesdd")
    except LinAlgError:
        logger.warning("gesdd did not converge, retrying with gesvd")
        try:
            u, s, vh = scipy.linalg.svd(a, lapack_driver="gesvd")
        except LinAlgError as err:
            raise ConvergenceFailure(f"SVD did not converge: {err}") from err
    return SvdResult(U=u, singular_values=s, Vh=vh)


def is_infinite(alpha: complex, beta: complex, tol: float = INFINITE_TOL) -> bool:
    return abs(beta) <= tol * (abs(alpha) + abs(beta))


def pencil_ratios(
    alpha: np.ndarray, beta: np.ndarray, tol: float = INFINITE_TOL
) -> np.ndarray:
    """alpha/beta with complex infinity where beta is negligible."""
    values = np.empty(len(alpha), dtype=np.complex128)
    for i, (a, b) in enumerate(zip(alpha, beta)):
        values[i] = complex(np.inf, 0.0) if is_infinite(a, b, tol) else a / b
    return values


def match_targets(values: np.ndarray, targets: Sequence[complex]) -> np.ndarray:
    """Boolean mask choosing, for each target in turn, the nearest unused value."""
    if len(targets) > len(values):
        raise DimensionMismatch(f"{len(targets)} targets requested from {len(values)} eigenvalues")
    mask = np.zeros(len(values), dtype=bool)
    for target in targets:
        best, best_dist = -1, np.inf
        for i, v in enumerate(values):
            if mask[i]:
                continue
            if np.isinf(target) or np.isinf(v):
                dist = 0.0 if (np.isinf(target) and np.isinf(v)) else np.inf
            else:
                dist = abs(v - target)
            if best < 0 or dist < best_dist:
                best, best_dist = i, dist
        mask[best] = True
    return mask


@dataclass(frozen=True)
class GeneralizedSchur:
    """Q* M Z = T_upper, Q* N Z = S_upper."""

    Q: np.ndarray
    Z: np.ndarray
    T_upper: np.ndarray
    S_upper: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def eigenvalue_pairs(self) -> List[Tuple[complex, complex]]:
        return [(complex(a), complex(b)) for a, b in zip(self.alpha, self.beta)]

    def eigenvalues(self, tol: float = INFINITE_TOL) -> np.ndarray:
        return pencil_ratios(self.alpha, self.beta, tol)


def _selection_function(select: Selector) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if callable(select):
        predicate = select

        def chooser(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
            return np.array([bool(predicate(v)) for v in pencil_ratios(alpha, beta)])

        return chooser

    targets = [complex(t) for t in select]

    def chooser(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        return match_targets(pencil_ratios(alpha, beta), targets)

    return chooser


def generalized_schur(
    m: object, n: object, select: Optional[Selector] = None
) -> GeneralizedSchur:
    """Complex QZ of the pencil (M, N).

    `select` is either a predicate on eigenvalues or a list of target eigenvalues; the
    chosen eigenvalues are moved to the leading diagonal positions. A target list picks
    exactly one eigenvalue per target (the nearest one not already taken).
    """
    m = as_square(m, "M")
    n = as_square(n, "N")
    if m.shape != n.shape:
        raise DimensionMismatch(f"pencil shapes differ: {m.shape} vs {n.shape}")
    try:
        if select is None:
            t, s, q, z = scipy.linalg.qz(m, n, output="complex")
            alpha, beta = np.diag(t).copy(), np.diag(s).copy()
        else:
            t, s, alpha, beta, q, z = scipy.linalg.ordqz(
                m, n, sort=_selection_function(select), output="complex"
            )
    except LinAlgError as err:
        logger.error(f"QZ failed on a {m.shape[0]}x{m.shape[0]} pencil: {err}")
        raise SchurFailure(f"QZ iteration failed: {err}") from err
    except ValueError as err:
        if "reorder" in str(err).lower():
            raise ReorderFailure(f"eigenvalue reordering failed: {err}") from err
        raise
    return GeneralizedSchur(Q=q, Z=z, T_upper=t, S_upper=s, alpha=alpha, beta=beta)
