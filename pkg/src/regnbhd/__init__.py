"""Algebraic regular neighbourhoods of almost invariant sets in graphs of groups."""

__version__ = "0.1.0"
