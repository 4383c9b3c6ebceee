"""Exceptions and warnings raised by hyperpark."""


class HyperparkError(Exception):
    """Base class for all hyperpark errors."""


class DomainError(HyperparkError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigError(DomainError):
    """A configuration file could not be understood."""

    def __init__(self, message: str, line: int | None = None) -> None:
        """
        Initialize the error.

        Parameters
        ----------
            message: Description of the problem
            line: 1-based line number in the configuration file, if known
        """
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FitError(DomainError):
    """The points handed to an exponent fit cannot be regressed."""


class ConvergenceError(HyperparkError, ArithmeticError):
    """A numerical procedure did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None) -> None:
        """
        Initialize the error.

        Parameters
        ----------
            message: Description of the failure
            achieved: Error estimate that was actually reached
        """
        if achieved is not None:
            message = f"{message} (achieved error {achieved:.3e})"
        super().__init__(message)
        self.achieved = achieved


class NegativeVarianceError(ConvergenceError):
    """A variance came out negative by more than its truncation bound."""


class PoleProximityWarning(RuntimeWarning):
    """A transform was evaluated very close to one of its poles."""
