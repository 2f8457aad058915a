"""
Exception hierarchy shared by the solver, the simulator and the harness.
"""
from typing import Optional


class GutError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(GutError, ValueError):
    """A precondition of a pure operation was violated."""


class SolverError(GutError, RuntimeError):
    """An equilibrium could not be computed or certified."""


class ScenarioError(GutError, ValueError):
    """A scenario document failed to parse or validate."""

    def __init__(self, field: Optional[str], message: str):
        """
        Initialize scenario error.

        Args:
            field: Dotted name of the offending field (None for parse errors)
            message: Human readable reason
        """
        self.field = field
        text = f"{field}: {message}" if field else message
        super().__init__(text)


class TrialError(GutError, RuntimeError):
    """A simulation trial was aborted by a propagated failure."""
