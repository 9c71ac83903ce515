"""Analytic and stochastic tools for broadband down-conversion and its up-conversion."""

__version__ = "0.1.0"
