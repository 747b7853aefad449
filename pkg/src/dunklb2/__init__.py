"""Dunkl kernel and generalized Bessel function for the root system B2."""

__version__ = "0.1.0"
