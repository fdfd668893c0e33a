"""Szego-kernel representing system for H^2 on the ring grid of scaled roots of unity."""

__version__ = "0.1.0"
