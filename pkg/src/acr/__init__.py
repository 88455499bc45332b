"""Agentic contextual retrieval over telecom standards corpora."""

__version__ = "0.1.0"
