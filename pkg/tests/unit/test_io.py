"""Test Matrix Market and JSON bundle exchange."""
import json

import numpy as np
import pytest

from src.errors import ConfigError
from src.matpoly.io import (
    dump_bundle,
    load_bundle,
    load_polynomial,
    polynomial_from_bundle,
    polynomial_to_bundle,
    read_matrix_market,
    save_polynomial,
)
from src.matpoly.polynomial import QuadMatrixPolynomial


class TestMatrixMarket:
    """Test dense Matrix Market files."""

    def test_save_and_load_real(self, tmp_path, example1_instance):
        """Test coefficients survive a write and read exactly."""
        P = example1_instance.polynomial
        paths = save_polynomial(P, tmp_path / "ex1")
        assert [p.name for p in paths] == ["ex1_a0.mtx", "ex1_a1.mtx", "ex1_a2.mtx"]
        loaded = load_polynomial(paths)
        for a, b in zip(P.coefficients, loaded.coefficients):
            assert np.array_equal(a, b)

    def test_complex_coefficients(self, tmp_path, rng):
        """Test complex arrays are written in the complex field."""
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        P = QuadMatrixPolynomial(A, np.eye(3), A.T)
        loaded = load_polynomial(save_polynomial(P, tmp_path / "c"))
        assert loaded.is_complex
        assert np.allclose(loaded.A0, A, rtol=0, atol=1e-15)

    def test_missing_file(self, tmp_path):
        """Test unreadable files become ConfigError."""
        with pytest.raises(ConfigError):
            read_matrix_market(tmp_path / "nope.mtx")

    def test_wrong_file_count(self, tmp_path):
        """Test exactly three coefficient files are needed."""
        with pytest.raises(ConfigError, match="three"):
            load_polynomial([tmp_path / "a.mtx"])


class TestBundle:
    """Test the JSON bundle format."""

    def test_real_bundle_layout(self):
        """Test field and row-major layout of a real bundle."""
        P = QuadMatrixPolynomial(np.array([[1.0, 2.0], [3.0, 4.0]]), np.eye(2), np.zeros((2, 2)))
        bundle = polynomial_to_bundle(P)
        assert bundle["m"] == 2
        assert bundle["field"] == "real"
        assert bundle["A0"] == [[1.0, 2.0], [3.0, 4.0]]

    def test_complex_bundle_uses_pairs(self, tmp_path):
        """Test complex entries are stored as [re, im] and read back."""
        P = QuadMatrixPolynomial(np.array([[1 + 2j]]), np.array([[1.0]]), np.array([[0.5j]]))
        path = tmp_path / "p.json"
        dump_bundle(P, path)
        raw = json.loads(path.read_text())
        assert raw["field"] == "complex"
        assert raw["A0"] == [[[1.0, 2.0]]]
        loaded = load_bundle(path)
        assert loaded.A2[0, 0] == 0.5j

    def test_malformed_bundles(self, tmp_path):
        """Test missing keys, bad shapes and unknown fields are ConfigErrors."""
        with pytest.raises(ConfigError, match="missing"):
            polynomial_from_bundle({"m": 1, "A0": [[1.0]], "A1": [[1.0]]})
        with pytest.raises(ConfigError, match="shape"):
            polynomial_from_bundle({"m": 2, "A0": [[1.0]], "A1": [[1.0]], "A2": [[1.0]]})
        with pytest.raises(ConfigError, match="field"):
            polynomial_from_bundle(
                {"m": 1, "field": "quaternion", "A0": [[1.0]], "A1": [[1.0]], "A2": [[1.0]]}
            )
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(ConfigError):
            load_bundle(broken)
