"""Exception types shared across the package."""


class DeepFirError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(DeepFirError, ValueError):
    """An argument violates an operation's precondition."""


class FormatError(DeepFirError, ValueError):
    """A file or byte stream does not match its documented format."""


class DegenerateFilterError(DeepFirError, ValueError):
    """A filter with an all-zero spectrum was passed where a nonzero one is required."""
