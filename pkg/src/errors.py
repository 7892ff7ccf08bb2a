"""Error types shared by the solvers and the benchmark harness."""
from typing import Any, Dict, Optional, Sequence


class QmeError(Exception):
    """Base class for every failure raised by the solver stack."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})
        self.stage: Optional[str] = None

    def to_record(self) -> Dict[str, Any]:
        """Structured form written by the CLI on failure."""
        return {
            "error": type(self).__name__,
            "message": str(self),
            "stage": self.stage,
            "diagnostics": self.diagnostics,
        }


class DimensionMismatch(QmeError, ValueError):
    """Operands do not have compatible shapes."""


class SingularMatrix(QmeError):
    """A factorization detected exact or numerical singularity."""

    def __init__(self, message: str, rcond: float, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.rcond = rcond
        self.diagnostics.setdefault("rcond", rcond)


class SingularA122(SingularMatrix):
    """The deflated block A122 is too ill-conditioned to eliminate."""


class Breakdown(QmeError):
    """The middle coefficient of a cyclic reduction step is singular."""

    def __init__(self, message: str, step: int, rcond: float, report: Any = None):
        super().__init__(message, {"step": step, "rcond": rcond})
        self.step = step
        self.rcond = rcond
        self.report = report


class ConvergenceFailure(QmeError):
    """An iterative dense kernel did not converge."""


class SchurFailure(QmeError):
    """The QZ iteration failed."""


class ReorderFailure(QmeError):
    """Swapping eigenvalues in a generalized Schur form was too ill-conditioned."""


class DegeneratePolynomial(QmeError):
    """det A(z) vanishes at every sample point."""


class SpecViolation(QmeError, ValueError):
    """Shift data does not satisfy the relations it is required to satisfy."""

    def __init__(self, message: str, defect: float, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message, diagnostics)
        self.defect = defect
        self.diagnostics.setdefault("defect", defect)


class NotQBD(QmeError, ValueError):
    """Coefficients are not of the form A0=-E0, A1=I-E1, A2=-E2 with stochastic E."""


class NoGap(QmeError):
    """The singular value gap never opened within the iteration cap."""

    def __init__(
        self,
        message: str,
        gap_ratios: Sequence[float],
        iterations: int,
        suggested_ell: Optional[int] = None,
    ):
        super().__init__(
            message,
            {
                "gap_ratios": list(gap_ratios),
                "iterations": iterations,
                "suggested_ell": suggested_ell,
            },
        )
        self.gap_ratios = tuple(gap_ratios)
        self.iterations = iterations
        self.suggested_ell = suggested_ell


class SelectionFailure(QmeError):
    """No eigenvalue selection gave an invertible leading Schur block."""


class BadCase(QmeError, ValueError):
    """Unknown generator case."""


class ConfigError(QmeError, ValueError):
    """Invalid run configuration or unusable input files."""
