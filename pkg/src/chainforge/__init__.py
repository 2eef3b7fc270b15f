"""Automata-backed decision procedures for prime ideal chains."""

__version__ = "0.1.0"
