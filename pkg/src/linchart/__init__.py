"""Numerical toolkit for chart-imported linear structures on phase space.

Subpackages cover: forward-mode jet arithmetic (``numcore``), coordinate
tensor calculus (``geometry``), imported linear structures and their axiom
checks (``linstruct``), Lagrangian Darboux frames (``lagrangian``), the
magnetic phase flow and its constants (``dynamics``), lattice Weyl and Moyal
quantisation (``quantize``), and the report CLI (``cli``).
"""

from __future__ import annotations

from .numcore import DomainError, Jet, Matrix, Series, Tolerance

__all__ = ["DomainError", "Jet", "Matrix", "Series", "Tolerance"]

__version__ = "0.1.0"
