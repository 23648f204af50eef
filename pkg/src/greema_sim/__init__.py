"""Simulator of robots that grow by taking in water or soil."""

__version__ = "0.1.0"
