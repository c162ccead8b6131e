"""Plane-strain simulation of splitting cracks under an eccentric centering strip."""

__version__ = "0.1.0"
