"""Embedding-aware feature discovery for event sequences."""

__version__ = "0.1.0"
