"""Exception hierarchy.

``InputError`` covers malformed or invalid user input (files, matrices,
parameters); the CLI maps it to exit code 2. Everything else derived from
``PagError`` is an analysis failure (exit code 3).
"""

from __future__ import annotations


class PagError(Exception):
    """Base class for all errors raised by this package."""


class InputError(PagError, ValueError):
    """Malformed or invalid input. ``location`` points into the source."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class StrategyError(InputError):
    """A matrix violates the strategy-matrix constraints."""


class SearchSpaceError(PagError):
    """The grid search space exceeds the configured cap."""


class NoEquilibriumError(PagError):
    """An analysis needed grid equilibria but none were found."""


class PreconditionError(PagError, ValueError):
    """An analysis was called on inputs outside its domain."""
