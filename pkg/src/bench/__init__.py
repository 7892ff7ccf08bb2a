"""
Bench Module - Command Line Harness

This module runs solvers on problem instances and writes CSV, JSON and Markdown reports.
"""
