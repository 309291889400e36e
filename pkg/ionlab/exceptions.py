"""Error types raised by the laboratory."""

from typing import List, Optional


class IonLabError(Exception):
    """Base class for every error raised by ionlab."""

    exit_code: int = 1


class DomainError(IonLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 3


class DegenerateInputError(IonLabError, ValueError):
    """Coincident points, a point at the nucleus, or a vanishing denominator."""

    exit_code = 3


class ConfigurationError(IonLabError):
    """Invalid options, dimensions, grids or command-line arguments."""

    exit_code = 3


class ConvergenceError(IonLabError):
    """A solver exhausted its iteration budget."""

    exit_code = 2

    def __init__(self, message: str, residual_trace: Optional[List[float]] = None):
        super().__init__(message)
        self.residual_trace = list(residual_trace or [])

    @property
    def last_residual(self) -> float:
        return self.residual_trace[-1] if self.residual_trace else float("nan")
