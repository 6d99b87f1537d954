"""Exception hierarchy shared across the package.

Two failure classes are distinguished deliberately: rejected inputs
(contract violations, caught before any numerics run) and accuracy
failures (numerics ran but missed a guaranteed tolerance). The CLI maps
them to exit codes 2 and 3.
"""

from __future__ import annotations

from typing import Any


class WWGMError(Exception):
    """Base class; carries an optional machine-readable detail dict."""

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    def record(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), **self.details}


class ValidationError(WWGMError):
    """Input rejected before computation (dimension mismatch, guard violation)."""


class AccuracyError(WWGMError):
    """Computation ran but a promised tolerance or conservation law failed."""
