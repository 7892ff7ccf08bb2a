"""Test quadratic matrix polynomials, residuals and spectra."""
import numpy as np
import pytest

from src.errors import DegeneratePolynomial, DimensionMismatch, NotQBD
from src.matpoly.polynomial import (
    QuadMatrixPolynomial,
    SolutionPair,
    gr_relation_defect,
    linearize,
    recover_R_from_G,
    residual_G,
    residual_R,
    spectrum,
)
from src.matpoly.report import SolveReport


class TestQuadMatrixPolynomial:
    """Test construction and QBD handling."""

    def test_coefficients_are_read_only(self):
        """Test the value object cannot be mutated in place."""
        P = QuadMatrixPolynomial(np.eye(2), np.eye(2), np.eye(2))
        with pytest.raises(ValueError):
            P.A0[0, 0] = 5.0

    def test_promotes_to_common_dtype(self):
        """Test mixing real and complex coefficients gives a complex polynomial."""
        P = QuadMatrixPolynomial(np.eye(2), 1j * np.eye(2), np.eye(2))
        assert P.is_complex
        assert P.A0.dtype == np.complex128

    def test_shape_mismatch(self):
        """Test coefficients of different sizes are rejected."""
        with pytest.raises(DimensionMismatch):
            QuadMatrixPolynomial(np.eye(2), np.eye(3), np.eye(2))

    def test_qbd_round_trip(self, example1_instance):
        """Test Example 1 is recognised as a QBD and its blocks are stochastic."""
        P = example1_instance.polynomial
        assert P.is_qbd()
        E0, E1, E2 = P.qbd_blocks()
        assert np.allclose((E0 + E1 + E2).sum(axis=1), 1.0)

    def test_not_qbd(self):
        """Test negative entries and bad row sums raise NotQBD."""
        P = QuadMatrixPolynomial.from_qbd(-0.1 * np.eye(2), np.eye(2) * 0.6, 0.5 * np.eye(2))
        with pytest.raises(NotQBD, match="negative"):
            P.check_qbd()
        Q = QuadMatrixPolynomial.from_qbd(0.2 * np.eye(2), 0.2 * np.eye(2), 0.2 * np.eye(2))
        with pytest.raises(NotQBD, match="sum to 1"):
            Q.check_qbd()

    def test_regularity(self):
        """Test the zero polynomial is degenerate and a generic one is not."""
        zero = QuadMatrixPolynomial(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
        assert not zero.is_regular()
        with pytest.raises(DegeneratePolynomial):
            zero.require_regular()
        assert QuadMatrixPolynomial(np.eye(2), np.eye(2), np.eye(2)).is_regular()


class TestResiduals:
    """Test residual evaluation and the G/R coupling."""

    def test_scalar_roots(self):
        """Test 2 - 3x + x^2 has roots 1 and 2 for both equations."""
        P = QuadMatrixPolynomial(np.array([[2.0]]), np.array([[-3.0]]), np.array([[1.0]]))
        assert residual_G(P, np.array([[1.0]])) == pytest.approx(0.0)
        assert residual_G(P, np.array([[2.0]])) == pytest.approx(0.0)
        # reversed equation 2y^2 - 3y + 1 = 0 has roots 1 and 1/2
        assert residual_R(P, np.array([[0.5]])) == pytest.approx(0.0)

    def test_relative_residual(self):
        """Test the relative residual divides by the sum of coefficient norms."""
        P = QuadMatrixPolynomial(np.array([[2.0]]), np.array([[-3.0]]), np.array([[1.0]]))
        raw = residual_G(P, np.array([[0.0]]))
        assert residual_G(P, np.array([[0.0]]), relative=True) == pytest.approx(raw / 6.0)

    def test_operand_size_checked(self):
        """Test an operand of the wrong size is rejected."""
        P = QuadMatrixPolynomial(np.eye(2), np.eye(2), np.eye(2))
        with pytest.raises(DimensionMismatch):
            residual_G(P, np.eye(3))

    def test_recover_R_from_known_G(self, example3_small):
        """Test R = -A2 (A1 + A2 G)^{-1} reproduces the generator's R."""
        inst = example3_small
        R = recover_R_from_G(inst.polynomial, inst.known_G)
        assert np.allclose(R, inst.known_R, atol=1e-10)
        assert gr_relation_defect(inst.polynomial, inst.known_G, inst.known_R) < 1e-10


class TestSpectrum:
    """Test the companion linearization and eigenvalue report."""

    def test_linearize_shape(self):
        """Test the pencil is 2m x 2m with the identity blocks in place."""
        M, N = linearize(np.eye(2), 2 * np.eye(2), 3 * np.eye(2))
        assert M.shape == N.shape == (4, 4)
        assert np.allclose(M[:2, 2:], np.eye(2))
        assert np.allclose(N[2:, 2:], 3 * np.eye(2))

    def test_scalar_spectrum(self):
        """Test 2 - 3z + z^2 has eigenvalues 1 and 2."""
        P = QuadMatrixPolynomial(np.array([[2.0]]), np.array([[-3.0]]), np.array([[1.0]]))
        report = spectrum(P)
        assert report.infinite_count == 0
        assert np.allclose(report.finite_eigenvalues, [1.0, 2.0])

    def test_singular_leading_coefficient_gives_infinity(self):
        """Test A2 = 0 gives one infinite eigenvalue per lost degree."""
        P = QuadMatrixPolynomial(np.array([[1.0]]), np.array([[-2.0]]), np.array([[0.0]]))
        report = spectrum(P)
        assert report.infinite_count == 1
        assert report.total == 2
        assert report.finite_eigenvalues[0] == pytest.approx(0.5)

    def test_example1_unit_circle_count(self, example1_instance):
        """Test Example 1 has six eigenvalues on the unit circle."""
        report = spectrum(example1_instance.polynomial)
        assert len(report.on_unit_circle(tol=1e-5)) == 6

    def test_example1_full_spectrum(self, example1_instance):
        """Test Example 1 has 0, each cube root of unity twice and one infinite eigenvalue."""
        report = spectrum(example1_instance.polynomial)
        values = report.finite_eigenvalues
        assert report.infinite_count == 1
        assert len(values) == 7
        assert abs(values[0]) <= 1e-8
        for j in range(3):
            root = np.exp(2j * np.pi * j / 3)
            assert np.sum(np.abs(values - root) <= 1e-6) == 2


class TestSolveReport:
    """Test the shared report record."""

    def test_record_residuals_and_serialization(self):
        """Test residuals are filled in and the record is JSON friendly."""
        P = QuadMatrixPolynomial(np.array([[2.0]]), np.array([[-3.0]]), np.array([[1.0]]))
        report = SolveReport(solver="cr", m=1, wall_time=0.002)
        report.diagnostics["eigen"] = np.complex128(1 + 2j)
        report.record_residuals(P, SolutionPair(G=np.array([[1.0]]), R=np.array([[0.5]])))
        record = report.to_record()
        assert record["residual_G"] == pytest.approx(0.0)
        assert record["time_ms"] == pytest.approx(2.0)
        assert record["diagnostics"]["eigen"] == [1.0, 2.0]
        assert set(record) >= {"solver", "m", "ell", "case", "iterations", "converged"}
