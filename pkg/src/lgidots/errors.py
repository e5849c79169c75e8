"""Exception hierarchy shared by all modules."""


class LgiDotsError(Exception):
    """Base class for package errors."""


class ParameterError(LgiDotsError, ValueError):
    """Invalid physical or numerical parameter."""


class NumericError(LgiDotsError, RuntimeError):
    """A numerical routine failed to reach the requested accuracy."""


class InstabilityError(NumericError):
    """Time stepping blew up; usually the step is too large."""
