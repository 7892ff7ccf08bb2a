"""
QME Solvers - Core Package

Dense solvers for the quadratic matrix equations A0 + A1 X + A2 X^2 = 0 and
X^2 A0 + X A1 + A2 = 0, including block-shifted cyclic reduction for problems with
eigenvalues on the unit circle.
"""

__version__ = "0.1.0"
__author__ = "QME Solvers Development Team"
