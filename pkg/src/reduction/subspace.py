"""Invariant subspaces of G and R belonging to the eigenvalues inside the unit disk.

Cyclic reduction drives A0k W_{G,1} and T_{R,1} A2k to zero at a doubly exponential rate
while the unit-circle part does not decay. Once the singular values of A0k and A2k show a
gap after position ell, the trailing right singular vectors of A0k span W_{G,1} and the
trailing left singular vectors of A2k span T_{R,1}*.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np
import scipy.linalg

from src.errors import Breakdown, DimensionMismatch, NoGap, SingularMatrix
from src.linalg.kernels import SvdResult, ctranspose, factorize, norm_inf, svd
from src.matpoly.polynomial import QuadMatrixPolynomial
from src.reduction.cyclic_reduction import CRState, cr_step

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-12
DEFAULT_KMAX = 12


@dataclass(frozen=True)
class SubspaceBundle:
    """W_G = [W_{G,2} | W_{G,1}] and T_R = [T_{R,2}; T_{R,1}] with the compressed factors."""

    W_G: np.ndarray
    T_R: np.ndarray
    Lambda_G1: np.ndarray
    Lambda_R1: np.ndarray
    ell: int
    iterations_used: int = 0
    gap_ratios: Tuple[float, float] = (0.0, 0.0)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return int(self.W_G.shape[0])

    @property
    def W_G2(self) -> np.ndarray:
        return self.W_G[:, : self.ell]

    @property
    def W_G1(self) -> np.ndarray:
        return self.W_G[:, self.ell :]

    @property
    def T_R2(self) -> np.ndarray:
        return self.T_R[: self.ell, :]

    @property
    def T_R1(self) -> np.ndarray:
        return self.T_R[self.ell :, :]


def gap_ratio(singular_values: np.ndarray, ell: int) -> float:
    """sigma_{ell+1} / sigma_ell (1-based); 0 when sigma_ell vanishes."""
    upper = singular_values[ell - 1]
    if upper == 0:
        return 0.0
    return float(singular_values[ell] / upper)


def suggest_ell(singular_values: np.ndarray) -> Optional[int]:
    """Position of the largest relative drop between consecutive singular values."""
    best, best_ratio = None, np.inf
    for i in range(1, len(singular_values)):
        if singular_values[i - 1] == 0:
            break
        ratio = singular_values[i] / singular_values[i - 1]
        if ratio < best_ratio:
            best, best_ratio = i, ratio
    return best


@dataclass(frozen=True)
class GapSnapshot:
    """One cyclic reduction iterate with the SVDs the gap test looks at."""

    state: CRState
    sv0: SvdResult
    sv2: SvdResult
    ratios: Tuple[float, float]

    @property
    def k(self) -> int:
        return self.state.k

    def passes(self, eps: float) -> bool:
        return max(self.ratios) < eps


def gap_snapshots(P: QuadMatrixPolynomial, ell: int, kmax: int) -> Iterator[GapSnapshot]:
    """Yield the gap ratios after each of at most kmax cyclic reduction steps."""
    state = CRState.initial(P)
    for _ in range(kmax):
        state = cr_step(state)
        sv0 = svd(state.A0k)
        sv2 = svd(state.A2k)
        ratios = (gap_ratio(sv0.singular_values, ell), gap_ratio(sv2.singular_values, ell))
        logger.debug(f"step {state.k}: gap ratios {ratios[0]:.3e} (A0), {ratios[1]:.3e} (A2)")
        yield GapSnapshot(state=state, sv0=sv0, sv2=sv2, ratios=ratios)


def bundle_from_snapshot(
    P: QuadMatrixPolynomial, snapshot: GapSnapshot, ell: int, gap_passed: bool
) -> SubspaceBundle:
    """Subspace bundle spanned by the trailing singular vectors of one iterate."""
    state, sv0, sv2 = snapshot.state, snapshot.sv0, snapshot.sv2
    W_G = sv0.V
    T_R = ctranspose(sv2.U)
    W1 = W_G[:, ell:]
    T1 = T_R[ell:, :]
    try:
        lu = factorize(state.A1hat_k, f"A1hat at step {state.k}")
    except SingularMatrix as err:
        raise Breakdown(
            f"A1hat is singular at step {state.k}", step=state.k, rcond=err.rcond
        ) from err
    Lambda_G1 = -ctranspose(W1) @ lu.solve(P.A0 @ W1)
    Lambda_R1 = -T1 @ lu.solve_right(np.asarray(P.A2)) @ ctranspose(T1)

    sigma0 = sv0.singular_values[0] or 1.0
    sigma2 = sv2.singular_values[0] or 1.0
    diagnostics: Dict[str, Any] = {
        "gap_passed": gap_passed,
        "a0_annihilation": norm_inf(state.A0k @ W1) / sigma0,
        "a2_annihilation": norm_inf(T1 @ state.A2k) / sigma2,
        "singular_values_a0": sv0.singular_values.copy(),
        "singular_values_a2": sv2.singular_values.copy(),
    }
    for name, factor in (("Lambda_G1", Lambda_G1), ("Lambda_R1", Lambda_R1)):
        radius = float(np.max(np.abs(np.linalg.eigvals(factor)))) if factor.size else 0.0
        diagnostics[f"{name}_spectral_radius"] = radius
        if radius >= 1.0 and gap_passed:
            logger.warning(f"{name} has spectral radius {radius:.3e}; expected < 1")
    return SubspaceBundle(
        W_G=W_G,
        T_R=T_R,
        Lambda_G1=Lambda_G1,
        Lambda_R1=Lambda_R1,
        ell=ell,
        iterations_used=state.k,
        gap_ratios=snapshot.ratios,
        diagnostics=diagnostics,
    )


def check_arguments(P: QuadMatrixPolynomial, ell: int, eps: float, kmax: int) -> None:
    if not 1 <= ell < P.m:
        raise DimensionMismatch(f"ell={ell} must satisfy 1 <= ell < m={P.m}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if kmax < 1:
        raise ValueError(f"kmax must be at least 1, got {kmax}")


def extract_subspaces(
    P: QuadMatrixPolynomial,
    ell: int,
    eps: float = DEFAULT_EPS,
    kmax: int = DEFAULT_KMAX,
    require_gap: bool = True,
) -> SubspaceBundle:
    """Run cyclic reduction until both gap ratios drop below eps.

    With require_gap=False the last iterate is used when kmax steps pass without the gap
    test succeeding; otherwise NoGap is raised.
    """
    check_arguments(P, ell, eps, kmax)
    last: Optional[GapSnapshot] = None
    for snapshot in gap_snapshots(P, ell, kmax):
        last = snapshot
        if snapshot.passes(eps):
            logger.info(f"Subspaces of dimension {P.m - ell} found after {snapshot.k} steps")
            return bundle_from_snapshot(P, snapshot, ell, True)

    assert last is not None
    ratios = last.ratios
    suggested = suggest_ell(last.sv0.singular_values)
    if require_gap:
        logger.error(
            f"No singular value gap at ell={ell} after {kmax} steps "
            f"(ratios {ratios[0]:.3e}, {ratios[1]:.3e}; largest gap at ell={suggested})"
        )
        raise NoGap(
            f"gap test did not pass within {kmax} steps for ell={ell}",
            gap_ratios=ratios,
            iterations=kmax,
            suggested_ell=suggested,
        )
    logger.warning(
        f"Gap test did not pass within {kmax} steps (ratios {ratios[0]:.3e}, {ratios[1]:.3e}); "
        "using the last iterate"
    )
    return bundle_from_snapshot(P, last, ell, False)


@dataclass(frozen=True)
class BundleDiagnostics:
    """Raw defects of a subspace bundle; invariance defects only with known solutions."""

    g_polynomial_defect: float
    r_polynomial_defect: float
    w_orthogonality: float
    t_orthogonality: float
    g_invariance: Optional[float] = None
    r_invariance: Optional[float] = None

    def worst(self) -> float:
        values = [self.g_polynomial_defect, self.r_polynomial_defect]
        values += [v for v in (self.g_invariance, self.r_invariance) if v is not None]
        return max(values)


def validate_bundle(
    P: QuadMatrixPolynomial,
    bundle: SubspaceBundle,
    G_exact: Optional[np.ndarray] = None,
    R_exact: Optional[np.ndarray] = None,
) -> BundleDiagnostics:
    """Defects of A0 W + A1 W L + A2 W L^2 and L'^2 T A0 + L' T A1 + T A2."""
    W1, T1 = bundle.W_G1, bundle.T_R1
    LG, LR = bundle.Lambda_G1, bundle.Lambda_R1
    g_defect = norm_inf(P.A0 @ W1 + P.A1 @ W1 @ LG + P.A2 @ W1 @ LG @ LG)
    r_defect = norm_inf(LR @ LR @ T1 @ P.A0 + LR @ T1 @ P.A1 + T1 @ P.A2)
    m = bundle.m
    w_orth = norm_inf(ctranspose(bundle.W_G) @ bundle.W_G - np.eye(m))
    t_orth = norm_inf(bundle.T_R @ ctranspose(bundle.T_R) - np.eye(m))
    g_inv = norm_inf(np.asarray(G_exact) @ W1 - W1 @ LG) if G_exact is not None else None
    r_inv = norm_inf(T1 @ np.asarray(R_exact) - LR @ T1) if R_exact is not None else None
    return BundleDiagnostics(g_defect, r_defect, w_orth, t_orth, g_inv, r_inv)


def exact_bundle(
    G: np.ndarray, R: np.ndarray, ell: int, margin: float = 1e-6
) -> SubspaceBundle:
    """Bundle built from known solutions through sorted complex Schur forms.

    Eigenvalues with modulus below 1 - margin count as interior.
    """
    def inside(x: complex) -> bool:
        return bool(abs(x) < 1.0 - margin)

    TG, ZG, n_g = scipy.linalg.schur(np.asarray(G, dtype=complex), output="complex", sort=inside)
    TR, ZR, n_r = scipy.linalg.schur(
        ctranspose(np.asarray(R, dtype=complex)), output="complex", sort=inside
    )
    m = ZG.shape[0]
    if n_g != m - ell or n_r != m - ell:
        raise DimensionMismatch(
            f"expected {m - ell} interior eigenvalues, found {n_g} in G and {n_r} in R"
        )
    W_G = np.hstack([ZG[:, n_g:], ZG[:, :n_g]])
    T_R = ctranspose(np.hstack([ZR[:, n_r:], ZR[:, :n_r]]))
    return SubspaceBundle(
        W_G=W_G,
        T_R=T_R,
        Lambda_G1=TG[:n_g, :n_g],
        Lambda_R1=ctranspose(TR[:n_r, :n_r]),
        ell=ell,
        diagnostics={"source": "exact"},
    )
