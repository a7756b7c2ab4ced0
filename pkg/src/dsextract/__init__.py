"""Dietary-supplement adverse event and indication extraction."""

__version__ = "0.1.0"
