"""Numerical verification of Lie algebroid calculus and homotopy momentum sections."""

__version__ = "0.1.0"
