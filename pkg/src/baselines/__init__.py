"""
Baselines Module - Comparison Solvers

This module provides the fixed-point iteration and shifted cyclic reduction.
"""
