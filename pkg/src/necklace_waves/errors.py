"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes, so every failure a user can trigger
should surface as one of the classes below.
"""


class NecklaceError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(NecklaceError, ValueError):
    """A graph description or parameter set violates its constraints."""


class ConfigError(NecklaceError, ValueError):
    """Bad configuration key, value or combination."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class NumericError(NecklaceError, ArithmeticError):
    """A numerical procedure failed (no convergence, NaN, ...)."""


class DomainError(NumericError):
    """Argument outside the domain where a formula is defined."""


class BandEdgeError(NumericError):
    """Implicit differentiation is singular (dF/domega vanishes)."""


class NoRootError(NumericError):
    """Newton iteration did not converge; carries the last iterate."""

    def __init__(self, message, last=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.iterations = iterations


class PathLostError(NumericError):
    """Continuation could not advance a path even after step refinement."""

    def __init__(self, message, param=None, path_ids=()):
        super().__init__(message)
        self.param = param
        self.path_ids = tuple(path_ids)


class UnsupportedNormalizationError(InvalidSpecError):
    """Necklace band formulas need the cell period L1 + L2 = 2*pi."""


class InsufficientCellsError(InvalidSpecError):
    """The grid is too short for the pulse tail to vanish at its ends."""


class FlatBandAbsentError(DomainError):
    """Flat bands do not exist when the semicircle length is zero."""


class SpeedOutOfRangeError(DomainError):
    """No Bloch wavenumber in the zone has the requested group velocity."""


class NoHomoclinicError(DomainError):
    """The normal form has no sech solution (second band derivative <= 0)."""


class NoSolitonError(DomainError):
    """The requested exact soliton needs sigma > c**2 / 4."""


class InconsistentBandError(NumericError):
    """The Floquet multiplier is not an eigenvalue of the monodromy matrix."""
