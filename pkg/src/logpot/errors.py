"""Exception types raised across the package."""


class LogpotError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LogpotError, ValueError):
    """Invalid charge configuration, weighted tuple or family."""


class ConfigSyntaxError(ConfigurationError):
    """Malformed configuration text; carries the offending line number."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class CapacityError(LogpotError, ValueError):
    """A combinatorial size cap (compound dimension, enumeration count) was exceeded."""


class ConvergenceError(LogpotError, ArithmeticError):
    """An iterative solver failed to converge within its sweep budget."""


class LPCyclingError(ConvergenceError):
    """The simplex iteration cap was hit."""


class VerificationError(LogpotError, AssertionError):
    """A numerically checked identity or inequality failed beyond tolerance."""
