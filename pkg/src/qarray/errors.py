"""Exception types shared across the package."""


class QArrayError(Exception):
    """Base class for all errors raised by qarray."""


class DuplicateLabelError(QArrayError, ValueError):
    pass


class WidthMismatchError(QArrayError, ValueError):
    pass


class CapacityError(QArrayError):
    """Raised when an exact solver would exceed its configured size limit."""


class InconsistentStateError(QArrayError):
    """Raised when an assignment cannot be decoded into a valid result."""
