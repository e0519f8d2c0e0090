"""Steady-state evolutionary algorithms on Jump-type benchmarks and their diversity dynamics."""

__version__ = "0.1.0"
