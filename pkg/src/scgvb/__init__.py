"""Measurement-only estimators for nonorthogonal valence-bond matrix elements."""

__version__ = "0.1.0"
