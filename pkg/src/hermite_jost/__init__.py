"""Spectral density of perturbed Hermite Jacobi matrices via Jost functions."""

__version__ = "0.1.0"
