"""Desk-scale reduction theory: Brown measures and Fuglede-Kadison
determinants of weighted direct sums of matrix algebras."""

__version__ = "0.1.0"
