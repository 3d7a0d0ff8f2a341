"""Constrained and hybrid planarity testing built on FPQ-trees."""

__version__ = "0.1.0"
