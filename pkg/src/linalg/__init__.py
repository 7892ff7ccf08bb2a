"""
Linalg Module - Dense Kernels

This module wraps LU solves, SVD and generalized Schur decompositions behind contracts
that report singularity and reordering failures.
"""
