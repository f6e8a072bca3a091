"""Complementary fashion item recommendation toolkit."""

__version__ = "0.1.0"
