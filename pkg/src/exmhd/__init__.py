"""Ideal MHD written with differential forms on flat periodic n-tori."""

__version__ = "0.1.0"
