"""Invariants, blow-ups and parabolic curves of plane germs tangent to the identity."""

__version__ = "0.1.0"
