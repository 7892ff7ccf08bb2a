"""
Problems Module - Test Problem Generators

This module builds the benchmark instances and randomized property-test instances.
"""
