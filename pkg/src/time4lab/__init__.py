"""Time-triggered network update laboratory."""

__version__ = "0.1.0"
