"""Worst-case output-size bounds for natural join queries under functional dependencies."""

__version__ = "0.1.0"
