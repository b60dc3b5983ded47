"""Solvers and classifiers for constraint problems over powers of (Q;<)."""
