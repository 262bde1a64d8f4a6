"""Numerical failure types raised by the solvers.

Precondition violations are reported as ``ValueError``; the classes below
cover failures that only show up once the numerics run.
"""

from typing import Optional


class NearSingularError(RuntimeError):
    """A Navier solve did not reach the acceptance tolerance."""

    def __init__(self, message: str, column: Optional[int] = None):
        if column is not None:
            message = f"column {column}: {message}"
        super().__init__(message)
        self.column = column


class NeumannDivergenceError(RuntimeError):
    """The CGO remainder iteration stopped contracting."""


class SymbolFloorError(RuntimeError):
    """Every Fourier mode of the conjugated symbol fell below the floor."""


class CgoResidualError(RuntimeError):
    """A CGO solution failed its residual check and cannot feed the identity."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""
