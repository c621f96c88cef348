"""Exception types shared across the package."""

from __future__ import annotations


class LRSearchError(Exception):
    """Base class for all package errors."""


class NumericalDomainError(LRSearchError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class PoleError(NumericalDomainError):
    """A function was evaluated at (or too close to) one of its poles."""


class ConvergenceError(LRSearchError, ArithmeticError):
    """A series or iteration failed to reach its tolerance.

    ``estimate`` carries the last achieved error/tail estimate when known.
    """

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateSpectrumError(NumericalDomainError):
    """The spectrum cannot be rescaled or summed (max == min, or a zero denominator)."""


class OptimizationError(LRSearchError, RuntimeError):
    """A bracketed minimisation could not be trusted; ``scan`` holds the evaluated grid."""

    def __init__(self, message: str, scan=None):
        super().__init__(message)
        self.scan = scan


class SpectralBoundError(LRSearchError, ArithmeticError):
    """The Chebyshev propagator detected eigenvalues outside its assumed bounds."""


class DenseCapError(LRSearchError, MemoryError):
    """Requested a dense operator larger than the configured cap."""


class MissingInputError(LRSearchError, KeyError):
    """Figure emission needs sweep records that are not available."""

    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""
