"""Matrix Market and JSON bundle exchange for polynomial coefficients."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.io
import scipy.sparse

from src.errors import ConfigError
from src.matpoly.polynomial import QuadMatrixPolynomial

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_matrix_market(path: PathLike) -> np.ndarray:
    """Read a dense (array) or coordinate Matrix Market file as a dense array."""
    try:
        data = scipy.io.mmread(str(path))
    except (OSError, ValueError) as err:
        logger.error(f"Failed to read Matrix Market file {path}: {err}")
        raise ConfigError(f"cannot read Matrix Market file {path}: {err}") from err
    if scipy.sparse.issparse(data):
        data = data.toarray()
    return np.asarray(data)


def write_matrix_market(path: PathLike, matrix: np.ndarray) -> None:
    """Write a dense matrix in Matrix Market array format."""
    scipy.io.mmwrite(str(path), np.asarray(matrix), precision=17)


def load_polynomial(paths: Sequence[PathLike]) -> QuadMatrixPolynomial:
    """Build a polynomial from three Matrix Market files (A0, A1, A2)."""
    if len(paths) != 3:
        raise ConfigError(f"expected three coefficient files, got {len(paths)}")
    return QuadMatrixPolynomial(*(read_matrix_market(p) for p in paths))


def save_polynomial(P: QuadMatrixPolynomial, prefix: PathLike) -> List[Path]:
    """Write `<prefix>_a0.mtx`, `<prefix>_a1.mtx`, `<prefix>_a2.mtx`."""
    prefix = Path(prefix)
    written = []
    for i, coeff in enumerate(P.coefficients):
        target = prefix.parent / f"{prefix.name}_a{i}.mtx"
        write_matrix_market(target, coeff)
        written.append(target)
    return written


def _encode(matrix: np.ndarray, complex_field: bool) -> List[List[Any]]:
    if complex_field:
        return [[[float(v.real), float(v.imag)] for v in row] for row in matrix]
    return [[float(v) for v in row] for row in np.real(matrix)]


def _decode(rows: List[List[Any]], complex_field: bool, m: int, name: str) -> np.ndarray:
    try:
        if complex_field:
            data = np.array([[complex(re, im) for re, im in row] for row in rows])
        else:
            data = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bundle entry {name} is malformed: {err}") from err
    if data.shape != (m, m):
        raise ConfigError(f"bundle entry {name} has shape {data.shape}, expected ({m}, {m})")
    return data


def polynomial_to_bundle(P: QuadMatrixPolynomial) -> Dict[str, Any]:
    complex_field = P.is_complex
    bundle: Dict[str, Any] = {"m": P.m, "field": "complex" if complex_field else "real"}
    for name, coeff in zip(("A0", "A1", "A2"), P.coefficients):
        bundle[name] = _encode(coeff, complex_field)
    return bundle


def polynomial_from_bundle(bundle: Dict[str, Any]) -> QuadMatrixPolynomial:
    try:
        m = int(bundle["m"])
        field = bundle.get("field", "real")
        if field not in ("real", "complex"):
            raise ConfigError(f"unknown field {field!r}")
        coeffs: Tuple[np.ndarray, ...] = tuple(
            _decode(bundle[name], field == "complex", m, name) for name in ("A0", "A1", "A2")
        )
    except KeyError as err:
        raise ConfigError(f"bundle is missing key {err}") from err
    return QuadMatrixPolynomial(*coeffs)


def load_bundle(path: PathLike) -> QuadMatrixPolynomial:
    try:
        with open(path, "r", encoding="utf-8") as f:
            bundle = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        logger.error(f"Failed to read bundle {path}: {err}")
        raise ConfigError(f"cannot read bundle {path}: {err}") from err
    return polynomial_from_bundle(bundle)


def dump_bundle(P: QuadMatrixPolynomial, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(polynomial_to_bundle(P), f)
