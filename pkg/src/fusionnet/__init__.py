"""Finite-dimensional verification engine for fusion-categorical lattice models."""
from __future__ import annotations

__version__ = "0.1.0"
