"""Quasi-periodic SL(2, R) cocycles: return-time combinatorics, product lemmas
and a finite-level construction of Lyapunov-exponent jumps."""

__version__ = "0.1.0"
