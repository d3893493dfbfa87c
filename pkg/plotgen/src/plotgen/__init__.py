"""Render sqprimes figure datasets (CSV + manifest) to static images."""

__version__ = "0.1.0"
