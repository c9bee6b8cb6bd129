"""Bounded, executable models of factor systems, their limits and PER-sets."""

__version__ = "0.1.0"
