"""Exact tools for Schmidt-type games on weighted badly approximable vectors."""

from .core import Ball, Box, RationalPoint, Weight, canonical_point, validate_weight
from .exact import Power

__all__ = ["Ball", "Box", "Power", "RationalPoint", "Weight", "canonical_point", "validate_weight"]
__version__ = "0.1.0"
