"""The ell x ell equation B0 + B1 X + B2 X^2 = 0 whose eigenvalues lie on the unit circle.

X solves it exactly when M [I; X] = N [I; X] X for the companion pencil
M = [[0, I], [-B0, -B1]], N = [[I, 0], [0, B2]]. Every eigenvalue of the pencil appears
twice, so one representative per pair is moved to the top of the generalized Schur form
and X = Z21 Z11^{-1} is read off the leading Schur vectors.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import DimensionMismatch, ReorderFailure, SelectionFailure, SingularMatrix
from src.linalg.kernels import (
    GeneralizedSchur,
    as_square,
    factorize,
    generalized_schur,
    reciprocal_condition,
)
from src.matpoly.polynomial import QuadMatrixPolynomial, linearize, residual_G, residual_R

logger = logging.getLogger(__name__)

CLUSTER_TOL = 1e-6
MIN_RCOND_Z11 = 1e-10
MAX_ENUMERATION = 1024
RESIDUAL_TOL = 1e-8
UNIMODULAR_TOL = 1e-6


@dataclass(frozen=True)
class SmallQme:
    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    target_eigenvalues: Optional[Tuple[complex, ...]] = None

    def __post_init__(self) -> None:
        coeffs = [as_square(b, f"B{i}") for i, b in enumerate((self.B0, self.B1, self.B2))]
        if len({c.shape for c in coeffs}) != 1:
            raise DimensionMismatch("B0, B1 and B2 must have the same size")
        for name, c in zip(("B0", "B1", "B2"), coeffs):
            object.__setattr__(self, name, c.astype(np.complex128))
        if self.target_eigenvalues is not None:
            targets = tuple(complex(t) for t in self.target_eigenvalues)
            if len(targets) != self.ell:
                raise DimensionMismatch(
                    f"expected {self.ell} target eigenvalues, got {len(targets)}"
                )
            object.__setattr__(self, "target_eigenvalues", targets)

    @property
    def ell(self) -> int:
        return int(self.B0.shape[0])

    @property
    def polynomial(self) -> QuadMatrixPolynomial:
        return QuadMatrixPolynomial(self.B0, self.B1, self.B2)


@dataclass(frozen=True)
class SmallQmeSolution:
    G11: np.ndarray
    rcond_z11: float
    residual: float
    selected_eigenvalues: np.ndarray
    pencil_eigenvalues: np.ndarray
    multiplicity_ok: bool
    unimodular_defect: float
    schur_formula_gap: Optional[float]
    candidates_tried: int


def build_pencil(q: SmallQme) -> Tuple[np.ndarray, np.ndarray]:
    return linearize(q.B0, q.B1, q.B2)


def _close(a: complex, b: complex, tol: float) -> bool:
    if np.isinf(a) or np.isinf(b):
        return bool(np.isinf(a) and np.isinf(b))
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def cluster_eigenvalues(values: np.ndarray, tol: float = CLUSTER_TOL) -> List[List[int]]:
    """Single-linkage clusters of nearby eigenvalues, repaired so every cluster is even.

    Odd clusters are merged with the nearest other odd cluster.
    """
    n = len(values)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if _close(values[i], values[j], tol):
                parent[find(i)] = find(j)
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = sorted(groups.values(), key=lambda c: c[0])

    def distance(a: List[int], b: List[int]) -> float:
        finite = [
            abs(values[i] - values[j])
            for i in a
            for j in b
            if np.isfinite(values[i]) and np.isfinite(values[j])
        ]
        return min(finite) if finite else np.inf

    while True:
        odd = [c for c in clusters if len(c) % 2 == 1]
        if len(odd) < 2:
            break
        a, b = min(
            ((x, y) for k, x in enumerate(odd) for y in odd[k + 1 :]),
            key=lambda pair: distance(*pair),
        )
        clusters = [c for c in clusters if c is not a and c is not b] + [sorted(a + b)]
        clusters.sort(key=lambda c: c[0])
    return clusters


def _selection_groups(
    q: SmallQme, values: np.ndarray, clusters: List[List[int]]
) -> List[Tuple[List[int], int]]:
    """(members, how many to pick) per cluster."""
    if q.target_eigenvalues is None:
        return [(c, len(c) // 2) for c in clusters]
    counts: Dict[int, int] = {}
    for target in q.target_eigenvalues:
        nearest = int(np.argmin(np.abs(values - target)))
        owner = next(k for k, c in enumerate(clusters) if nearest in c)
        counts[owner] = counts.get(owner, 0) + 1
    groups = []
    for owner, count in sorted(counts.items()):
        members = clusters[owner]
        if count > len(members):
            raise SelectionFailure(
                f"{count} targets map to a cluster of {len(members)} eigenvalues"
            )
        groups.append((members, count))
    return groups


def schur_formula_solution(schur: GeneralizedSchur, ell: int) -> np.ndarray:
    """Q11 T11 S11^{-1} Q11^{-1}, equal to Z21 Z11^{-1} for an exact decomposition."""
    Q11 = schur.Q[:ell, :ell]
    T11 = schur.T_upper[:ell, :ell]
    S11 = schur.S_upper[:ell, :ell]
    core = factorize(S11, "S11").solve_right(T11)
    return factorize(Q11, "Q11").solve_right(Q11 @ core)


class _Selector:
    """Evaluates eigenvalue selections and remembers the best one."""

    def __init__(self, M: np.ndarray, N: np.ndarray, values: np.ndarray, ell: int):
        self.M, self.N, self.values, self.ell = M, N, values, ell
        self.best: Optional[Tuple[float, Tuple[int, ...], GeneralizedSchur]] = None
        self.tried = 0

    def score(self, selection: Sequence[int]) -> float:
        self.tried += 1
        try:
            schur = generalized_schur(self.M, self.N, select=list(self.values[list(selection)]))
        except ReorderFailure as err:
            logger.debug(f"selection {tuple(selection)} could not be reordered: {err}")
            return -1.0
        rcond = reciprocal_condition(schur.Z[: self.ell, : self.ell])
        if self.best is None or rcond > self.best[0]:
            self.best = (rcond, tuple(selection), schur)
        return rcond


def _search(selector: _Selector, groups: List[Tuple[List[int], int]]) -> None:
    options = [list(itertools.combinations(members, k)) for members, k in groups]
    total = math.prod(len(o) for o in options)
    if total <= MAX_ENUMERATION:
        for combo in itertools.product(*options):
            selector.score([i for part in combo for i in part])
        return
    # coordinate ascent, one sweep over the clusters
    current = [o[0] for o in options]
    best_score = selector.score([i for part in current for i in part])
    for g, choices in enumerate(options):
        for choice in choices[1:]:
            trial = current[:g] + [choice] + current[g + 1 :]
            value = selector.score([i for part in trial for i in part])
            if value > best_score:
                best_score, current = value, trial


def solve_small_detailed(q: SmallQme) -> SmallQmeSolution:
    """Solve the small equation and return the solution with its diagnostics."""
    ell = q.ell
    M, N = build_pencil(q)
    base = generalized_schur(M, N)
    values = base.eigenvalues()
    clusters = cluster_eigenvalues(values)
    multiplicity_ok = len(clusters) == ell and all(len(c) == 2 for c in clusters)
    if not multiplicity_ok:
        logger.warning(
            f"pencil eigenvalues do not form {ell} pairs (cluster sizes "
            f"{[len(c) for c in clusters]})"
        )

    selector = _Selector(M, N, values, ell)
    _search(selector, _selection_groups(q, values, clusters))
    if selector.best is None or selector.best[0] <= MIN_RCOND_Z11:
        rcond = selector.best[0] if selector.best is not None else 0.0
        logger.error(f"No eigenvalue selection gives an invertible Z11 (best rcond {rcond:.3e})")
        raise SelectionFailure(
            f"no selection yields rcond(Z11) > {MIN_RCOND_Z11:.0e}",
            {"best_rcond": rcond, "candidates_tried": selector.tried},
        )
    rcond, selection, schur = selector.best
    Z11 = schur.Z[:ell, :ell]
    Z21 = schur.Z[ell:, :ell]
    G11 = factorize(Z11, "Z11").solve_right(Z21)

    residual = residual_G(q.polynomial, G11)
    scale = q.polynomial.max_norm() or 1.0
    if residual > RESIDUAL_TOL * scale:
        logger.warning(f"small equation residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e} scale")
    unimodular_defect = float(np.max(np.abs(np.abs(np.linalg.eigvals(G11)) - 1.0)))
    if unimodular_defect > UNIMODULAR_TOL:
        logger.warning(f"eigenvalues of G11 leave the unit circle by {unimodular_defect:.3e}")
    try:
        gap: Optional[float] = float(
            np.max(np.abs(schur_formula_solution(schur, ell) - G11))
        )
    except SingularMatrix:
        gap = None
    return SmallQmeSolution(
        G11=G11,
        rcond_z11=rcond,
        residual=residual,
        selected_eigenvalues=values[list(selection)],
        pencil_eigenvalues=values,
        multiplicity_ok=multiplicity_ok,
        unimodular_defect=unimodular_defect,
        schur_formula_gap=gap,
        candidates_tried=selector.tried,
    )


def solve_small(q: SmallQme) -> np.ndarray:
    """The solution of B0 + B1 X + B2 X^2 = 0 with unit-circle spectrum."""
    return solve_small_detailed(q).G11


def recover_Rbar11(q: SmallQme, G11: np.ndarray) -> np.ndarray:
    """R11 = -B2 (B2 G11 + B1)^{-1}."""
    lu = factorize(q.B2 @ G11 + q.B1, "B2 G11 + B1")
    return -lu.solve_right(q.B2)


def reversed_residual(q: SmallQme, R11: np.ndarray) -> float:
    """||R11^2 B0 + R11 B1 + B2||."""
    return residual_R(q.polynomial, R11)
