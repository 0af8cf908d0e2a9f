"""Desk-scale simulation and certification workbench for linear XEB heavy output generation."""

__version__ = "0.1.0"
