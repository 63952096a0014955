"""Exception hierarchy shared by all modules."""


class StableSDEError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(StableSDEError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class GridError(StableSDEError, ValueError):
    """A time grid is not strictly increasing or does not span [0, T]."""


class AlignmentError(StableSDEError, ValueError):
    """Two grids that must be nested or identical are not."""


class NumericalError(StableSDEError, ArithmeticError):
    """A quadrature or root-finding routine failed to reach its target.

    Attributes
    ----------
    achieved : float or None
        Best error estimate reached before giving up.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class CertificateError(StableSDEError, ValueError):
    """A coefficient or modulus fails one of its structural conditions."""


class FeasibilityError(StableSDEError, ValueError):
    """A mollifier cap cannot carry unit mass on the requested support."""


class ContractError(StableSDEError, ValueError):
    """A caller-declared bound (e.g. a growth envelope) was violated."""


class ConfigError(StableSDEError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
