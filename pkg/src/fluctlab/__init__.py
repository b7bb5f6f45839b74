"""Exact and sampled tools for fluctuations of ergodic averages along Foelner sequences."""

__version__ = "0.1.0"
