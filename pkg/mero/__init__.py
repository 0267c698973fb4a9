"""Stochastic approximation toolkit for minimax excess risk optimization."""

__version__ = "0.3.0"
