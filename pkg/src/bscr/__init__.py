"""
BS-CR Module - Block-Shifted Cyclic Reduction

This module deflates the unit-circle eigenvalues, solves the small condensed equation
and reconstructs G and R.
"""
