"""Synthesis of adaptive test strategies from LTL specifications and fault models."""
from __future__ import annotations

__version__ = "0.1.0"
