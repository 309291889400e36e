"""Numerical engines: geometry, functionals, optimizers and the Thomas-Fermi solver."""
