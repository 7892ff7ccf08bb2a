"""Test the BS-CR driver end to end on small instances."""
import numpy as np
import pytest

from src.bscr.driver import BscrReport, bscr_solve
from src.errors import DegeneratePolynomial, NoGap
from src.linalg.kernels import norm_inf
from src.matpoly.polynomial import QuadMatrixPolynomial
from src.problems.suite import random_split_instance


class TestBscrSolve:
    """Test bscr_solve."""

    def test_example1(self, example1_instance):
        """Test the null-recurrent QBD is solved in at most three steps."""
        P = example1_instance.polynomial
        pair, report = bscr_solve(P, 3)
        assert isinstance(report, BscrReport)
        assert report.converged
        assert report.subspace_iterations <= 3
        assert report.residual_G <= 1e-12
        assert report.residual_R <= 1e-12
        assert not np.iscomplexobj(pair.G)
        np.testing.assert_allclose(pair.G.sum(axis=1), np.ones(4), atol=1e-10)

    def test_example3(self, example3_small):
        """Test case 1 reaches residual 1e-8 within six steps when stopping on the residual."""
        inst = example3_small
        pair, report = bscr_solve(inst.polynomial, inst.ell, tol=1e-8, stop="residual")
        assert report.converged
        assert report.iterations <= 6
        assert report.residual_G <= 1e-8
        assert report.residual_R <= 1e-8
        assert report.diagnostics["stop"] == "residual"
        assert report.diagnostics["gr_relation_defect"] <= 1e-7
        assert norm_inf(pair.G - inst.known_G) <= 1e-5 * norm_inf(inst.known_G)

    def test_real_instance_keeps_real_result(self):
        inst = random_split_instance(10, 2, seed=11, field="real")
        pair, report = bscr_solve(inst.polynomial, inst.ell)
        assert report.converged
        assert pair.G.dtype == np.float64
        assert "discarded_imaginary" in report.diagnostics

    def test_record_carries_stage_diagnostics(self, example3_small):
        _, report = bscr_solve(example3_small.polynomial, example3_small.ell)
        record = report.to_record()
        assert record["solver"] == "bscr"
        assert record["ell"] == 2
        diagnostics = record["diagnostics"]
        assert len(diagnostics["gap_ratios"]) == 2
        assert diagnostics["small_qme_residual"] <= 1e-9
        assert diagnostics["a122_rcond"] > 0

    def test_failure_is_tagged_with_its_stage(self, example3_small):
        with pytest.raises(NoGap) as exc_info:
            bscr_solve(example3_small.polynomial, example3_small.ell, kmax=1)
        assert exc_info.value.stage == "subspace"
        assert exc_info.value.to_record()["stage"] == "subspace"

    def test_without_gap_requirement(self, example3_small):
        """Test the last iterate is used when the gap test is waived."""
        _, report = bscr_solve(
            example3_small.polynomial, example3_small.ell, kmax=2, require_gap=False
        )
        assert report.subspace_iterations == 2
        assert report.diagnostics["gap_passed"] is False

    def test_residual_stop_is_no_later_than_gap_stop(self, example3_small):
        """Test the residual rule stops at or before the step where the gap test passes."""
        inst = example3_small
        _, gap_report = bscr_solve(inst.polynomial, inst.ell)
        _, residual_report = bscr_solve(inst.polynomial, inst.ell, tol=1e-8, stop="residual")
        assert residual_report.iterations <= gap_report.iterations
        assert gap_report.diagnostics["stop"] == "gap"

    def test_residual_stop_failure_is_tagged(self, example3_small):
        with pytest.raises(NoGap) as exc_info:
            bscr_solve(
                example3_small.polynomial, example3_small.ell, kmax=1, tol=1e-8, stop="residual"
            )
        assert exc_info.value.stage == "subspace"
        assert exc_info.value.iterations == 1

    def test_unknown_stop_rule(self, example3_small):
        with pytest.raises(ValueError, match="stop must be one of"):
            bscr_solve(example3_small.polynomial, example3_small.ell, stop="never")

    def test_degenerate_polynomial_is_rejected(self):
        """Test det A(z) = 0 everywhere is reported before any cyclic reduction step."""
        P = QuadMatrixPolynomial(np.diag([1.0, 0.0]), np.zeros((2, 2)), np.zeros((2, 2)))
        with pytest.raises(DegeneratePolynomial) as exc_info:
            bscr_solve(P, 1)
        assert exc_info.value.stage == "input"
