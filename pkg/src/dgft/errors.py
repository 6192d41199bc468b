"""Exception hierarchy shared by the solver modules."""

from __future__ import annotations


class DGFTError(Exception):
    """Base class for all solver errors."""


class ConfigurationError(DGFTError, ValueError):
    """A run configuration or mesh setup violates a precondition."""


class DomainError(DGFTError, ValueError):
    """A value lies outside the admissible interval of a flux or polynomial."""


class DegenerateShockError(DGFTError):
    """The shock height fell below the configured floor."""


class StateBlowupError(DGFTError):
    """The discrete solution left the admissible state interval."""

    def __init__(self, message: str, cell: int | None = None):
        super().__init__(message)
        self.cell = cell


class FatalStepError(DGFTError):
    """The tracked shock moved farther in one step than the scheme allows."""


class OutflowReached(DGFTError):
    """The shock cell would move past the last admissible index ``m - 3``."""


class CFLWarning(UserWarning):
    """A time step violates the standard or the strengthened CFL condition."""
