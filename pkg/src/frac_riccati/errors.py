"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class FracRiccatiError(Exception):
    """Base class for library errors."""


class DomainError(FracRiccatiError, ValueError):
    """An input lies outside the region where an operation is defined."""


class PoleError(DomainError):
    """A Gamma function argument hit a non-positive integer."""


class UndefinedRadiusError(DomainError):
    """The coefficient used by a radius estimator vanishes."""


class BlowUpError(FracRiccatiError, ArithmeticError):
    """The numerical solution exceeded the overflow guard before the horizon."""

    def __init__(self, message: str, time: float | None = None,
                 frequency: complex | None = None, index: int | None = None):
        super().__init__(message)
        self.time = time
        self.frequency = frequency
        self.index = index


class ConvergenceError(FracRiccatiError, ArithmeticError):
    """A truncated expansion failed to settle within its caps."""


class CoefficientPoleError(PoleError):
    """A doubly-indexed recursion ratio hit a Gamma pole at (k, level)."""

    def __init__(self, k: int, level: int):
        super().__init__(f"Gamma pole in recursion ratio at k={k}, level={level}")
        self.k = k
        self.level = level
