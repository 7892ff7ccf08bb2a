"""Solver reports shared by every solver."""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from src.matpoly.polynomial import (
    QuadMatrixPolynomial,
    SolutionPair,
    gr_relation_defect,
    residual_G,
    residual_R,
)


@dataclass
class SolveReport:
    """Outcome of one solver run. `wall_time` is in seconds."""

    solver: str
    m: int
    iterations: int = 0
    residual_G: float = float("nan")
    residual_R: float = float("nan")
    relative_residual_G: float = float("nan")
    relative_residual_R: float = float("nan")
    wall_time: float = 0.0
    converged: bool = False
    ell: Optional[int] = None
    case: Optional[str] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def time_ms(self) -> float:
        return 1e3 * self.wall_time

    def record_residuals(self, P: QuadMatrixPolynomial, solution: SolutionPair) -> None:
        scale = P.norm_scale() or 1.0
        self.residual_G = residual_G(P, solution.G)
        self.residual_R = residual_R(P, solution.R)
        self.relative_residual_G = self.residual_G / scale
        self.relative_residual_R = self.residual_R / scale
        self.diagnostics["gr_relation_defect"] = gr_relation_defect(P, solution.G, solution.R)

    def to_record(self) -> Dict[str, Any]:
        return {
            "solver": self.solver,
            "m": self.m,
            "ell": self.ell,
            "case": self.case,
            "iterations": self.iterations,
            "residual_G": float(self.residual_G),
            "residual_R": float(self.residual_R),
            "time_ms": float(self.time_ms),
            "converged": bool(self.converged),
            "diagnostics": _plain(self.diagnostics),
        }


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays so the value is JSON serializable."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(np.real(value)), float(np.imag(value))]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value
