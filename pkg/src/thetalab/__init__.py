"""Exact modular-symbol tables, theta-coefficient statistics, and vanishing
censuses for elliptic curves over Q."""

from .curves import CurveData, CurveError, load_curve

__version__ = "0.1.0"

__all__ = ["CurveData", "CurveError", "load_curve", "__version__"]
