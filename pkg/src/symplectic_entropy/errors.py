"""Exception hierarchy shared by all modules."""


class SymplecticEntropyError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SymplecticEntropyError, ValueError):
    """Matrix or point shapes are incompatible."""


class NumericError(SymplecticEntropyError, ArithmeticError):
    """A numerical routine failed (non-finite data, non-convergence)."""


class DomainError(SymplecticEntropyError, ValueError):
    """An input lies outside the domain on which an operation is defined."""


class BudgetError(SymplecticEntropyError, RuntimeError):
    """An iterative search ran out of its budget before succeeding.

    The best value reached is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConstructionError(SymplecticEntropyError, ValueError):
    """A geometric model could not be built with the requested constants."""


class CertificateRefused(SymplecticEntropyError):
    """Markov crossing verification failed for at least one component."""

    def __init__(self, message, component=None, evidence=None):
        super().__init__(message)
        self.component = component
        self.evidence = evidence


class ConfigError(SymplecticEntropyError, ValueError):
    """Experiment configuration does not satisfy its schema."""
