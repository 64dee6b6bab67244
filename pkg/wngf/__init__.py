"""Weighted and normalized Gould–Fernandez brokerage roles."""

__version__ = "0.1.0"
