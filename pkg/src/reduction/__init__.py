"""
Reduction Module - Cyclic Reduction and Shifts

This module implements cyclic reduction, block shifts of the matrix polynomial and
extraction of the invariant subspaces inside the unit disk.
"""
