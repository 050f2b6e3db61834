"""Spectral statistics of the Ihara zeta function of sparse Erdős–Rényi graphs."""

__version__ = "0.1.0"
