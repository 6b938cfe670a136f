"""
Error taxonomy for shiftlab.
Every error raised on purpose by the library derives from ShiftLabError so the
command-line entry point can report it in one place.
"""


class ShiftLabError(Exception):
    """Base class for all shiftlab errors."""


class DomainError(ShiftLabError, ValueError):
    """An argument lies outside the domain of an operation."""


class ContractivityError(DomainError):
    """A contraction was required but no sup <= 1 certificate exists."""


class UnsupportedKindError(DomainError):
    """The operation is not defined for this kind of object."""


class UndecidedError(ShiftLabError):
    """Interval evaluation could not decide at the maximum precision."""

    def __init__(self, message, bits=None):
        super().__init__(message)
        self.bits = bits


class SpecParseError(ShiftLabError, ValueError):
    """Malformed JSON input; `location` points at the offending member."""

    def __init__(self, message, location='$'):
        super().__init__(f'{location}: {message}')
        self.location = location


class ConfigError(ShiftLabError, ValueError):
    """Invalid configuration value; `key` names the offending key."""

    def __init__(self, key, message):
        super().__init__(f'config key {key!r}: {message}')
        self.key = key


class UnknownClaimError(ShiftLabError, KeyError):
    """A claim id that is not in the registry."""
