"""Exact scattering diagrams, broken lines and theta functions in rank 2."""

__version__ = "0.1.0"
