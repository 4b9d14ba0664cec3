"""Rayleigh and Stoneley surface waves in variable isotropic elastic media."""

__version__ = "0.1.0"
