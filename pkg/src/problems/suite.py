"""Benchmark problems and randomized instances with known solutions."""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.errors import BadCase, DimensionMismatch
from src.matpoly.polynomial import QuadMatrixPolynomial, residual_G, residual_R

logger = logging.getLogger(__name__)

SELF_CHECK_TOL = 1e-12

# unit-circle eigenvalues of G per Example 3 case
EXAMPLE3_CASES: Dict[int, Tuple[complex, ...]] = {
    1: (0.6 + 0.8j, -1.0),
    2: (0.6 + 0.8j, 1.0, -0.8 - 0.6j, -1.0),
    3: (0.6 + 0.8j, 1.0, -0.8 - 0.6j, -1.0, -0.6 + 0.8j, 1.0, 0.6 - 0.8j, -1.0),
}


@dataclass(frozen=True)
class ProblemInstance:
    polynomial: QuadMatrixPolynomial
    ell: int
    label: str
    known_G: Optional[np.ndarray] = None
    known_R: Optional[np.ndarray] = None
    seed: Optional[int] = None
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.polynomial.m

    def self_check(self) -> Dict[str, float]:
        """Relative residuals of the attached solutions."""
        scale = self.polynomial.max_norm() or 1.0
        checks: Dict[str, float] = {}
        if self.known_G is not None:
            checks["residual_G"] = residual_G(self.polynomial, self.known_G) / scale
        if self.known_R is not None:
            checks["residual_R"] = residual_R(self.polynomial, self.known_R) / scale
        return checks


def _exact(rows: Sequence[Sequence[Fraction]]) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in rows])


def example1() -> ProblemInstance:
    """Null-recurrent 4x4 QBD with eigenvalues 0, the cube roots of unity (each double), inf."""
    q, z = Fraction(1, 4), Fraction(0)
    t = Fraction(3, 4)
    E0 = [[z, z, z, q], [Fraction(33, 160), z, z, z], [q, z, z, z], [z, q, z, z]]
    E1 = [[z, z, z, z], [z, z, t, z], [z, t, z, z], [z, z, z, z]]
    E2 = [[z, t, z, z], [z, z, z, Fraction(7, 160)], [z, z, z, z], [t, z, z, z]]
    P = QuadMatrixPolynomial.from_qbd(_exact(E0), _exact(E1), _exact(E2))
    return ProblemInstance(polynomial=P, ell=3, label="example1")


def _symmetric_tridiagonal(diagonal: Sequence[float], off: float) -> np.ndarray:
    n = len(diagonal)
    return np.diag(np.asarray(diagonal, dtype=float)) + off * (np.eye(n, k=1) + np.eye(n, k=-1))


def example2(p: int) -> ProblemInstance:
    """QBD of size 2p with double eigenvalues at +1 and -1."""
    if p < 2:
        raise DimensionMismatch(f"p must be at least 2, got {p}")
    S1 = _symmetric_tridiagonal([3.0] + [2.0] * (p - 2) + [3.0], 1.0) / 8.0
    S2 = _symmetric_tridiagonal([4.0] + [3.0] * (p - 2) + [4.0], 1.0) / 10.0
    zero = np.zeros((p, p))
    E0 = np.block([[zero, S1], [S2, zero]])
    E2 = np.block([[zero, S2], [S1, zero]])
    P = QuadMatrixPolynomial.from_qbd(E0, np.zeros((2 * p, 2 * p)), E2)
    return ProblemInstance(polynomial=P, ell=2, label=f"example2_p{p}", params={"p": p})


def _from_factors(
    G11: np.ndarray,
    G12: np.ndarray,
    G22: np.ndarray,
    R11: np.ndarray,
    R12: np.ndarray,
    R22: np.ndarray,
) -> Tuple[QuadMatrixPolynomial, np.ndarray, np.ndarray]:
    """A(z) = (zR - I) P (zI - G) with P = tridiag(-1, 4, -1)."""
    m = G11.shape[0] + G22.shape[0]
    column = np.zeros(m)
    column[0], column[1] = 4.0, -1.0
    Pm = scipy.linalg.toeplitz(column)
    G = np.block([[G11, G12], [np.zeros((G22.shape[0], G11.shape[0])), G22]])
    R = np.block([[R11, R12], [np.zeros((R22.shape[0], R11.shape[0])), R22]])
    PG = Pm @ G
    poly = QuadMatrixPolynomial(PG, -R @ PG - Pm, R @ Pm)
    return poly, G, R


def _verify(instance: ProblemInstance) -> ProblemInstance:
    checks = instance.self_check()
    bound = SELF_CHECK_TOL * instance.m
    if any(v > bound for v in checks.values()):
        logger.warning(
            f"{instance.label}: generator self-check residuals {checks} exceed {bound:.1e}"
        )
    return instance


def example3(m: int, case_id: int, seed: int = 0) -> ProblemInstance:
    """Complex instance with prescribed unit-circle eigenvalues and known G, R."""
    if case_id not in EXAMPLE3_CASES:
        raise BadCase(f"unknown case {case_id}; expected one of {sorted(EXAMPLE3_CASES)}")
    mu = np.array(EXAMPLE3_CASES[case_id], dtype=complex)
    ell = len(mu)
    if m <= ell:
        raise DimensionMismatch(f"m={m} must exceed ell={ell} for case {case_id}")
    rng = np.random.default_rng(seed)
    n = m - ell
    lam = 1.0 / 3.0 + 1.0 / (ell + np.arange(1, n + 1))
    G12 = rng.random((ell, n))
    R12 = rng.random((ell, n))
    poly, G, R = _from_factors(
        np.diag(mu), G12, np.diag(lam), np.diag(1.0 / mu), R12, np.diag(2.0 * lam / 3.0)
    )
    return _verify(
        ProblemInstance(
            polynomial=poly,
            ell=ell,
            label=f"example3_m{m}_case{case_id}",
            known_G=G,
            known_R=R,
            seed=seed,
            params={"m": m, "case": case_id},
        )
    )


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_split_instance(
    m: int, ell: int, seed: int, field: str = "complex"
) -> ProblemInstance:
    """Example 3 recipe with random unit-circle angles and interior eigenvalues in (0, 0.9).

    The real field uses 2x2 rotation blocks, so ell must be even there.
    """
    if not 1 <= ell < m:
        raise DimensionMismatch(f"ell={ell} must satisfy 1 <= ell < m={m}")
    if field not in ("real", "complex"):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    if field == "real" and ell % 2:
        raise DimensionMismatch("real instances need an even ell")
    rng = np.random.default_rng(seed)
    n = m - ell
    if field == "complex":
        # separated angles, one per sector
        angles = 2.0 * np.pi * (np.arange(ell) + rng.uniform(0.15, 0.85, size=ell)) / ell
        mu = np.exp(1j * angles)
        G11, R11 = np.diag(mu), np.diag(1.0 / mu)
    else:
        pairs = ell // 2
        angles = np.pi * (np.arange(pairs) + rng.uniform(0.15, 0.85, size=pairs)) / pairs
        G11 = scipy.linalg.block_diag(*[_rotation(a) for a in angles])
        R11 = G11.T.copy()
    G22 = np.diag(rng.uniform(0.05, 0.9, size=n))
    R22 = np.diag(rng.uniform(0.05, 0.9, size=n))
    G12 = rng.random((ell, n))
    R12 = rng.random((ell, n))
    poly, G, R = _from_factors(G11, G12, G22, R11, R12, R22)
    return _verify(
        ProblemInstance(
            polynomial=poly,
            ell=ell,
            label=f"random_m{m}_ell{ell}_{field}",
            known_G=G,
            known_R=R,
            seed=seed,
            params={"m": m, "field": field},
        )
    )


def drift_qbd(m: int, drift: float, seed: int) -> ProblemInstance:
    """Random dense QBD whose level moves down with probability 1/2 + drift/2 per row.

    Positive drift gives a positive-recurrent chain and negative drift a transient one;
    either way z = 1 is a simple eigenvalue of A(z).
    """
    if not -1.0 < drift < 1.0:
        raise ValueError(f"drift must lie in (-1, 1), got {drift}")
    rng = np.random.default_rng(seed)
    mass = [0.5 * (1.0 + drift) * 0.8, 0.2, 0.5 * (1.0 - drift) * 0.8]
    blocks: List[np.ndarray] = []
    for weight in mass:
        block = rng.uniform(0.1, 1.0, size=(m, m))
        blocks.append(weight * block / block.sum(axis=1, keepdims=True))
    P = QuadMatrixPolynomial.from_qbd(*blocks)
    return ProblemInstance(
        polynomial=P,
        ell=1,
        label=f"drift_qbd_m{m}_{drift:+.2f}",
        seed=seed,
        params={"m": m, "drift": drift},
    )


def builtin_instance(name: str, **params: Any) -> ProblemInstance:
    """Look up a generator by name: example1, example2, example3, random, drift."""
    if name == "example1":
        return example1()
    if name == "example2":
        return example2(int(params.get("p", 8)))
    if name == "example3":
        return example3(
            int(params.get("m", 16)), int(params.get("case", 1)), int(params.get("seed", 0))
        )
    if name == "random":
        return random_split_instance(
            int(params.get("m", 8)),
            int(params.get("ell", 2)),
            int(params.get("seed", 0)),
            str(params.get("field", "complex")),
        )
    if name == "drift":
        return drift_qbd(
            int(params.get("m", 4)), float(params.get("drift", 0.2)), int(params.get("seed", 0))
        )
    raise BadCase(f"unknown problem {name!r}")
