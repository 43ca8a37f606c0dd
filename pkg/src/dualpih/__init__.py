"""Dual-arm compliant peg-in-hole simulation and learning from demonstration."""

__version__ = "0.1.0"
