"""Exception types shared across the package."""


class ViewguardError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ViewguardError, ValueError):
    """Malformed or inconsistent input (shapes, encodings, invalid values)."""


class ParseError(InputError):
    """A file could not be parsed; the message names the offending location."""


class TrainingError(ViewguardError, ValueError):
    """A baseline classifier cannot be trained on the given data."""


class SolverError(ViewguardError, RuntimeError):
    """A numerical solve failed beyond recoverable tolerance."""
