"""Exception types shared across the package."""


class SlalomError(Exception):
    """Base class for every error this package raises on purpose."""


class ParseError(SlalomError):
    """Malformed interchange input.

    Carries the 1-based line number of the offending line when known so
    callers can point at the exact spot in the file.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ValidationError(SlalomError):
    """Input violates a documented precondition or invariant."""


class ConfigError(SlalomError):
    """Unknown configuration key or unusable value."""
