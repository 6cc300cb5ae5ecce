"""Generalized dual-unitary gates from biunitary building blocks, with exact circuit checks."""

__version__ = "0.1.0"

DEFAULT_TOL = 1e-10
