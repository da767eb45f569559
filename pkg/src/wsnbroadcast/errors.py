"""Exception types shared across the package.

Each carries the CLI exit code it maps to.
"""


class BroadcastModelError(Exception):
    exit_code = 1


class DomainError(BroadcastModelError, ValueError):
    """An argument lies outside the domain of the model."""

    exit_code = 2


class UsageError(BroadcastModelError):
    exit_code = 2


class ConvergenceError(BroadcastModelError, ArithmeticError):
    """A root finder hit its iteration cap. ``bracket`` is the last interval."""

    exit_code = 3

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class CapacityError(BroadcastModelError):
    exit_code = 2


class ValidationBandError(BroadcastModelError):
    exit_code = 4


class OutputError(BroadcastModelError, OSError):
    exit_code = 5
