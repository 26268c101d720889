"""Exception types shared across the package."""


class PremvalError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PremvalError):
    """A file or text input could not be parsed."""


class ValidationError(PremvalError):
    """Input parsed fine but violates a semantic requirement."""
