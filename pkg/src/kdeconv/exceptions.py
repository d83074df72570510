"""Exception types raised across the package."""


class DeconvError(Exception):
    """Base class for all package errors."""


class ValidationError(DeconvError, ValueError):
    """Invalid user input or configuration (CLI exit code 2)."""


class NumericalError(DeconvError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result (CLI exit code 3)."""


class OutOfDomain(ValidationError):
    """A point lies outside the grid; usually the grid was built too small for the data."""


class InvalidRadius(ValidationError):
    pass


class InvalidBandwidth(ValidationError):
    pass


class InvalidParam(ValidationError):
    pass


class InvalidExponent(ValidationError):
    pass


class InvalidCutoff(ValidationError):
    pass


class UnsupportedRoute(ValidationError):
    pass


class UnsupportedScenario(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class CFVanishes(NumericalError):
    """The error characteristic function is (numerically) zero inside the kernel band."""


class CholeskyFailure(NumericalError):
    pass


class AdmissibilityWarning(UserWarning):
    """A configuration lies outside the regime where the sqrt(n) theory applies."""
