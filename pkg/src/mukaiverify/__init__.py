"""Exact verification toolkit for birational constructions of Mukai fourfolds."""

__version__ = "0.1.0"
