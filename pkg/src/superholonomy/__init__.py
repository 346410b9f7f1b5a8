"""Exact super holonomy computations on coordinate supermanifold models."""

__version__ = "0.1.0"
