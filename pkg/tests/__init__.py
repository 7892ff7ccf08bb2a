"""
QME Solvers - Test Suite
"""
