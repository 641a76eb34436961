"""Kloosterman sums, Zagier L-functions and Hecke traces for S-arithmetic trace formula checks."""

from __future__ import annotations

__version__ = "0.1.0"
