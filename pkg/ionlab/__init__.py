"""Numerical laboratory for the classical ionization problem."""

__version__ = "1.0.0"
