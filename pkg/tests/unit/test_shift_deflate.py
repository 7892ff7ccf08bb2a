"""Test block shifts and the transport of solutions."""
import numpy as np
import pytest

from src.errors import DimensionMismatch, NotQBD, SpecViolation
from src.matpoly.polynomial import QuadMatrixPolynomial, residual_G, residual_R, spectrum
from src.problems.suite import random_split_instance
from src.reduction.shift_deflate import ShiftSpec, block_shift, qbd_unit_shift, shifted_solutions


def _unit(m: int, i: int) -> np.ndarray:
    e = np.zeros((m, 1))
    e[i, 0] = 1.0
    return e


def _shift_data(inst):
    """Right eigenvector e1 of G and left eigenvector e_m^T of R (both are triangular)."""
    m = inst.m
    G, R = inst.known_G, inst.known_R
    e1, em = _unit(m, 0), _unit(m, m - 1)
    right = dict(V2=e1, S2=G[:1, :1], Y=e1.T)
    left = dict(U1=em.T, S1=1.0 / R[-1:, -1:], X=em)
    return right, left


def _same_multiset(got: np.ndarray, expected: np.ndarray, tol: float) -> bool:
    remaining = list(got)
    for value in expected:
        scale = max(1.0, abs(value))
        distances = [abs(v - value) / scale for v in remaining]
        best = int(np.argmin(distances))
        if distances[best] > tol:
            return False
        remaining.pop(best)
    return not remaining


class TestShiftSpec:
    """Test validation of shift data."""

    def test_right_and_left_constructors(self):
        """Test the convenience constructors fill q and the side."""
        right = ShiftSpec.right(np.ones((3, 1)), np.ones((1, 1)), np.full((1, 3), 1 / 3))
        assert right.q == 1 and right.has_right and not right.has_left and right.m == 3
        left = ShiftSpec.left(np.ones((1, 3)) / 3, np.eye(1), np.ones((3, 1)))
        assert left.has_left and not left.has_right

    def test_biorthogonality_enforced(self):
        """Test Y V2 must be the identity."""
        with pytest.raises(SpecViolation, match="Y V2"):
            ShiftSpec.right(np.ones((3, 1)), np.ones((1, 1)), np.ones((1, 3)))

    def test_incomplete_or_oversized_data(self):
        """Test partial sides and q >= m are rejected."""
        with pytest.raises(DimensionMismatch):
            ShiftSpec(q=1, V2=np.ones((3, 1)))
        with pytest.raises(DimensionMismatch):
            ShiftSpec.right(np.eye(2), np.eye(2), np.eye(2))
        with pytest.raises(DimensionMismatch):
            ShiftSpec.right(np.ones((3, 1)), np.eye(2), np.full((1, 3), 1 / 3))


class TestBlockShift:
    """Test eigenvalue relocation by block shifts."""

    @pytest.mark.parametrize("seed", range(20))
    def test_moves_exactly_the_targeted_eigenvalues(self, seed):
        """Test mu goes to 0, S1 goes to infinity and nothing else moves."""
        inst = random_split_instance(5 + seed % 3, 1 + seed % 2, seed)
        right, left = _shift_data(inst)
        spec = ShiftSpec(q=1, **right, **left)
        before = spectrum(inst.polynomial)
        after = spectrum(block_shift(inst.polynomial, spec))

        assert after.infinite_count == before.infinite_count + 1
        expected = list(before.finite_eigenvalues)
        moved_to_zero = complex(right["S2"][0, 0])
        moved_to_inf = complex(left["S1"][0, 0])
        for target in (moved_to_zero, moved_to_inf):
            i = int(np.argmin([abs(v - target) for v in expected]))
            expected.pop(i)
        expected.append(0.0)
        assert _same_multiset(after.finite_eigenvalues, np.array(expected), 1e-6)

    def test_right_shift_transports_G(self):
        """Test G - V2 S2 Y solves the right-shifted equation."""
        inst = random_split_instance(6, 2, seed=11)
        right, _ = _shift_data(inst)
        spec = ShiftSpec.right(**right)
        shifted = block_shift(inst.polynomial, spec)
        G_t, R_t = shifted_solutions(inst.known_G, inst.known_R, spec)
        assert np.allclose(shifted.A0 @ spec.V2, 0)
        assert residual_G(shifted, G_t) <= 1e-10 * shifted.norm_scale()
        assert R_t is inst.known_R

    def test_left_shift_transports_R(self):
        """Test R - X S1^{-1} U1 solves the left-shifted reversed equation."""
        inst = random_split_instance(6, 2, seed=12)
        _, left = _shift_data(inst)
        spec = ShiftSpec.left(**left)
        shifted = block_shift(inst.polynomial, spec)
        _, R_t = shifted_solutions(None, inst.known_R, spec)
        assert np.allclose(spec.U1 @ shifted.A2, 0)
        assert residual_R(shifted, R_t) <= 1e-10 * shifted.norm_scale()

    def test_rejects_non_invariant_data(self):
        """Test a vector that is not an eigenvector of G fails the hypothesis."""
        inst = random_split_instance(6, 2, seed=13)
        m = inst.m
        v = _unit(m, m - 1)
        spec = ShiftSpec.right(v, np.array([[0.5]]), v.T)
        with pytest.raises(SpecViolation):
            block_shift(inst.polynomial, spec)
        with pytest.raises(SpecViolation):
            shifted_solutions(inst.known_G, None, spec)


class TestQbdUnitShift:
    """Test the classical shift of the eigenvalue 1."""

    def test_ones_vector_is_annihilated(self, example1_instance):
        """Test A0~ 1 = 0 and the shifted spectrum gains a zero."""
        P = example1_instance.polynomial
        shifted, spec = qbd_unit_shift(P)
        assert np.allclose(shifted.A0 @ np.ones(P.m), 0)
        assert spec.q == 1
        finite = spectrum(shifted).finite_eigenvalues
        assert np.sum(np.abs(finite) < 1e-8) == 2

    def test_requires_qbd(self):
        """Test non-QBD input is refused."""
        P = QuadMatrixPolynomial(np.eye(2), np.eye(2), np.eye(2))
        with pytest.raises(NotQBD):
            qbd_unit_shift(P)
