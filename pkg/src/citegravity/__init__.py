"""Distance effects on knowledge flows measured through citation data."""

__version__ = "0.1.0"
