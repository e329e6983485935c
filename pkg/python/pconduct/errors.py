"""Exception hierarchy shared by every pipeline.

Each category maps to its own process exit code so the command line can
report *what kind* of failure happened without parsing messages.
"""

from __future__ import annotations

from typing import Any

__all__ = [
    "PConductError",
    "ConfigError",
    "GeometryError",
    "SolverError",
    "InconclusiveError",
]


class PConductError(Exception):
    """Base class for all errors raised by pconduct."""

    category = "error"
    exit_code = 1


class ConfigError(PConductError, ValueError):
    """A scene file, run configuration, or argument is invalid."""

    category = "config"
    exit_code = 2


class GeometryError(PConductError, ValueError):
    """A domain, mesh, or half-space system cannot be built."""

    category = "geometry"
    exit_code = 3


class SolverError(PConductError, ArithmeticError):
    """A forward solve or ODE integration failed.

    ``best`` holds the best iterate reached before giving up (or ``None``)
    and ``residual`` its first-order residual.
    """

    category = "solver"
    exit_code = 4

    def __init__(self, message: str, *, best: Any = None, residual: float | None = None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class InconclusiveError(PConductError):
    """An indicator sweep could not classify anything.

    ``trace`` is the full classification history for post-mortem reports.
    """

    category = "inconclusive"
    exit_code = 5

    def __init__(self, message: str, *, trace: Any = None):
        super().__init__(message)
        self.trace = trace
