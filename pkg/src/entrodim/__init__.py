"""Entropy and dimension toolkit for symbolic and interval dynamics."""

__version__ = "0.1.0"
