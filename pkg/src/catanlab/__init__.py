"""Catan simulation workbench: rules engine, baseline bots, LLM players and self-improvement loops."""

__version__ = "0.1.0"
