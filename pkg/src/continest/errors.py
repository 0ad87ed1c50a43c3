"""Exception types shared across the package."""


class ContinestError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ContinestError):
    """A value or structure violates a documented invariant."""


class ParseError(ContinestError):
    """An input file is malformed.

    Carries the offending path and line number when known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}: " if line is None else f"{path}:{line}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


class GenerationError(ContinestError):
    """Network synthesis could not satisfy its constraints."""


class ConfigError(ContinestError):
    """An estimator or solver configuration is invalid."""
