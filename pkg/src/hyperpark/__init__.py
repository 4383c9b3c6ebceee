"""Hyperpark - Parking search on hyperfractal Manhattan street networks."""

from importlib.metadata import version

__version__ = version("hyperpark")
