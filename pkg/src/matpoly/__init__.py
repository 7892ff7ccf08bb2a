"""
Matpoly Module - Quadratic Matrix Polynomials

This module holds the polynomial type, residuals, the eigenvalue oracle, solver reports
and Matrix Market / JSON exchange.
"""
