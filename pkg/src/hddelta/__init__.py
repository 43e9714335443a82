"""Pathwise upper bounds for functions of high-dimensional estimators."""

__version__ = "0.1.0"
