"""
omegasieve/errors.py
Exception hierarchy. Library code raises these; the CLI maps them to exit codes.
"""


class OmegaSieveError(Exception):
    """Base class for every error raised by omegasieve."""


class DomainError(OmegaSieveError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class CapacityError(OmegaSieveError):
    """A limit exceeds the configured memory or time budget."""


class InsufficientPrimesError(OmegaSieveError):
    """The prime table does not reach the square root of the segment end."""


class UncoveredCombinationError(OmegaSieveError):
    """No theorem or reference formula covers the requested (set, h, k, order)."""


class EmptySampleError(OmegaSieveError, ValueError):
    """A statistic was requested over an empty sample."""


class ConfigError(OmegaSieveError, ValueError):
    """A run configuration failed validation."""
