"""Spectral computations for the Friedrichs model with rational data."""

from __future__ import annotations

__version__ = "0.1.0"
