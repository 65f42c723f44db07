"""Secluded unit-cube partitions, the rounding schemes they induce, and checks of their bounds."""

__version__ = "0.1.0"
