"""Exhaustive desk-scale toolkit for arithmetic regularity on finite abelian groups."""

__version__ = "0.1.0"
