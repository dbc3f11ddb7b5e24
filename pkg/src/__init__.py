"""Localization bounds for RSS sources with uncertain anchor positions."""

__version__ = "0.1.0"
