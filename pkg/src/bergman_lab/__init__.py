"""Numerical laboratory for Bergman kernels and boundary indices on model domains."""

__version__ = "0.1.0"
