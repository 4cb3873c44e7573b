"""Coined quantum walk on a circle in phase space: ideal and circuit-QED engines."""

__version__ = "0.1.0"
