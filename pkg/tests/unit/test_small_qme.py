"""Test the small unit-circle equation solver."""
import numpy as np
import pytest

from src.bscr.small_qme import (
    RESIDUAL_TOL,
    SmallQme,
    build_pencil,
    cluster_eigenvalues,
    recover_Rbar11,
    reversed_residual,
    schur_formula_solution,
    solve_small,
    solve_small_detailed,
)
from src.errors import DimensionMismatch
from src.linalg.kernels import generalized_schur
from src.matpoly.polynomial import spectrum


def _synthetic(ell: int, seed: int):
    """(zY - I)(zI - X) with X and Y^{-1} sharing ell separated unit-circle eigenvalues."""
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * (np.arange(ell) + rng.uniform(0.2, 0.8, size=ell)) / ell
    mu = np.exp(1j * angles)
    Q1 = rng.standard_normal((ell, ell)) + 1j * rng.standard_normal((ell, ell)) + 3 * np.eye(ell)
    Q2 = rng.standard_normal((ell, ell)) + 1j * rng.standard_normal((ell, ell)) + 3 * np.eye(ell)
    X = Q1 @ np.diag(mu) @ np.linalg.inv(Q1)
    Y = Q2 @ np.diag(mu.conj()) @ np.linalg.inv(Q2)
    return SmallQme(X, -(Y @ X + np.eye(ell)), Y), X, mu


class TestClustering:
    """Test eigenvalue pairing."""

    def test_pairs_are_found(self):
        """Test close values pair up."""
        values = np.array([1.0, -1.0, 1.0 + 1e-9, -1.0 - 1e-9j])
        assert cluster_eigenvalues(values) == [[0, 2], [1, 3]]

    def test_odd_clusters_are_merged(self):
        """Test two odd clusters become one even cluster."""
        values = np.array([1.0, 1.0 + 1e-9, 1.0 + 2e-9, 1.0 + 1e-3, 5.0, 5.0])
        clusters = cluster_eigenvalues(values)
        assert all(len(c) % 2 == 0 for c in clusters)
        assert sorted(len(c) for c in clusters) == [2, 4]


class TestSolveSmall:
    """Test the solution of the small equation."""

    @pytest.mark.parametrize("seed", range(50))
    def test_residual_and_unimodular_spectrum(self, seed):
        """Test the residual bound and that G11 has its spectrum on the unit circle."""
        ell = 1 + seed % 8
        q, _, mu = _synthetic(ell, seed)
        solution = solve_small_detailed(q)
        scale = q.polynomial.max_norm()
        assert solution.residual <= RESIDUAL_TOL * scale
        assert solution.unimodular_defect <= 1e-6
        assert solution.multiplicity_ok
        eig = np.linalg.eigvals(solution.G11)
        for value in mu:
            assert np.min(np.abs(eig - value)) <= 1e-6

    def test_recovers_known_solution(self):
        """Test the Jordan-pair case reproduces the generating X."""
        q, X, _ = _synthetic(3, seed=101)
        assert np.allclose(solve_small(q), X, atol=1e-6)

    def test_schur_formula_agrees(self):
        """Test Q11 T11 S11^{-1} Q11^{-1} matches Z21 Z11^{-1}."""
        q, _, _ = _synthetic(2, seed=7)
        solution = solve_small_detailed(q)
        assert solution.schur_formula_gap is not None
        assert solution.schur_formula_gap <= 1e-8

        M, N = build_pencil(q)
        schur = generalized_schur(M, N, select=list(solution.selected_eigenvalues))
        G11 = schur.Z[2:, :2] @ np.linalg.inv(schur.Z[:2, :2])
        assert np.allclose(schur_formula_solution(schur, 2), G11, atol=1e-8)

    def test_targets_restrict_the_search(self):
        """Test explicit targets are honoured."""
        base, _, mu = _synthetic(2, seed=3)
        q = SmallQme(base.B0, base.B1, base.B2, target_eigenvalues=tuple(mu))
        solution = solve_small_detailed(q)
        for value in solution.selected_eigenvalues:
            assert np.min(np.abs(mu - value)) <= 1e-6
        assert solution.residual <= RESIDUAL_TOL * q.polynomial.max_norm()

    def test_target_count_checked(self):
        """Test the number of targets must equal ell."""
        base, _, mu = _synthetic(2, seed=3)
        with pytest.raises(DimensionMismatch):
            SmallQme(base.B0, base.B1, base.B2, target_eigenvalues=(mu[0],))

    def test_reversed_solution(self):
        """Test R11 = -B2 (B2 G11 + B1)^{-1} solves the reversed equation."""
        q, _, _ = _synthetic(4, seed=5)
        G11 = solve_small(q)
        R11 = recover_Rbar11(q, G11)
        assert reversed_residual(q, R11) <= 1e-8 * q.polynomial.max_norm()
        assert np.allclose(np.abs(np.linalg.eigvals(R11)), 1.0, atol=1e-6)


def _scalar(b0: float, b1: float, b2: float) -> SmallQme:
    return SmallQme(np.array([[b0]]), np.array([[b1]]), np.array([[b2]]))


class TestScalarCases:
    """Test the one-dimensional equation with a double root on the unit circle."""

    def test_pencil_entries(self):
        M, N = build_pencil(_scalar(-1.0, 2.0, -1.0))
        np.testing.assert_array_equal(M, [[0.0, 1.0], [1.0, -2.0]])
        np.testing.assert_array_equal(N, [[1.0, 0.0], [0.0, -1.0]])

    def test_pencil_spectrum_matches_polynomial(self):
        """Test B2 = I, B1 = 0, B0 = -I gives +1 and -1, each ell times."""
        q = SmallQme(-np.eye(2), np.zeros((2, 2)), np.eye(2))
        M, N = build_pencil(q)
        np.testing.assert_array_equal(N[:2, :2], np.eye(2))
        values = np.sort_complex(spectrum(q.polynomial).finite_eigenvalues)
        np.testing.assert_allclose(values, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize(
        "coefficients, root", [((-1.0, 2.0, -1.0), 1.0), ((1.0, 2.0, 1.0), -1.0)]
    )
    def test_double_root(self, coefficients, root):
        G11 = solve_small(_scalar(*coefficients))
        assert G11.shape == (1, 1)
        assert G11[0, 0] == pytest.approx(root, abs=1e-6)

    @pytest.mark.parametrize(
        "coefficients, root", [((-1.0, 2.0, -1.0), 1.0), ((1.0, 2.0, 1.0), -1.0)]
    )
    def test_reversed_scalar(self, coefficients, root):
        """Test R11 = -B2 / (B2 G11 + B1) equals 1/mu."""
        R11 = recover_Rbar11(_scalar(*coefficients), np.array([[root]]))
        assert R11[0, 0] == pytest.approx(1.0 / root)

    def test_zero_leading_coefficient_gives_zero(self):
        q = SmallQme(np.diag([0.5, -0.5]), np.eye(2), np.zeros((2, 2)))
        R11 = recover_Rbar11(q, np.diag([0.3, 0.7]))
        np.testing.assert_array_equal(R11, np.zeros((2, 2)))


class TestReciprocity:
    """Test the spectra of G11 and R11 are reciprocal."""

    @pytest.mark.parametrize("seed", range(10))
    def test_reciprocal_eigenvalues(self, seed):
        q, _, _ = _synthetic(1 + seed % 5, seed + 200)
        G11 = solve_small(q)
        R11 = recover_Rbar11(q, G11)
        expected = 1.0 / np.linalg.eigvals(G11)
        got = np.linalg.eigvals(R11)
        for value in expected:
            assert np.min(np.abs(got - value)) <= 1e-6
        for value in got:
            assert np.min(np.abs(expected - value)) <= 1e-6
