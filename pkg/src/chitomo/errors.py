"""Shared exception types.

ValueError subclasses signal bad inputs (CLI exit code 1); NumericalCheckError
signals a failed runtime numerical safeguard such as a truncation-leak or
boundary-decay check (CLI exit code 2).
"""
from __future__ import annotations


class ValidationError(ValueError):
    """Invalid user input: bad mode index, dimension mismatch, bad config."""


class NumericalCheckError(RuntimeError):
    """A numerical safeguard failed (truncation leak, boundary decay, ...)."""
