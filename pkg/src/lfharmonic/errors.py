"""Exception types shared by every module."""


class LocalFieldError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LocalFieldError, ValueError):
    """Invalid or mismatched field parameters, or a malformed argument."""


class PrecisionError(LocalFieldError, ArithmeticError):
    """A digit needed by an operation lies outside the known precision window."""


class ResolutionError(LocalFieldError, ValueError):
    """An object is not constant on the cells of the requested level."""


class DomainError(LocalFieldError, ValueError):
    """A weight or density took a nonpositive value where positivity is required."""


class NonIntegrableError(DomainError):
    """A power function |x|^a with a <= -1 has infinite mass near the origin."""


class WindowError(LocalFieldError, ValueError):
    """A computational window does not carry enough of the mass of its input."""


class UnsupportedError(LocalFieldError, NotImplementedError):
    """The operation is not defined for the selected backend."""
