"""Discrete spinor-matrix quantum mechanics on space-time graphs."""

__version__ = "0.1.0"

ALPHA = 1 / 137.035999
