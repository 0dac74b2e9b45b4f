"""Exterior differential systems, prolongation structures and conservation laws."""

__version__ = "0.1.0"
