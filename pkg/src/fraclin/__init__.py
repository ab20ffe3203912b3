"""Exact search and certification of globally periodic fractional-linear recursions."""

__version__ = "0.1.0"
