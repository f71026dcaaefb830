"""Exception hierarchy shared across the package.

Every error raised on a documented failure path derives from one of the
classes below, so callers (and the command line driver) can map failures
to exit codes without string matching.
"""

from __future__ import annotations

__all__ = [
    "CritcoupleError",
    "ParameterError",
    "RegimeError",
    "ConfigError",
    "SolveError",
    "ConvergenceError",
    "UnsupportedDimensionError",
]


class CritcoupleError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CritcoupleError, ValueError):
    """A parameter tuple violates one or more admissibility constraints.

    ``violations`` lists every violated constraint, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class RegimeError(CritcoupleError, ValueError):
    """An operation was requested outside the exponent regime it is defined in."""


class ConfigError(CritcoupleError, ValueError):
    """A run configuration file or flag set could not be parsed."""


class SolveError(CritcoupleError, RuntimeError):
    """A root scan found no admissible solution; carries scan diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConvergenceError(CritcoupleError, RuntimeError):
    """An iterative solver failed to converge; carries partial results."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnsupportedDimensionError(CritcoupleError, ValueError):
    """The lattice layer only discretizes dimension N = 1."""
