"""Focused crawler with Dewey-based topic prediction and T-Graph link priorities."""

__version__ = "0.1.0"
