"""Exception hierarchy shared by all modules."""


class BerryThermError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BerryThermError, ValueError):
    """An argument lies outside the domain of the operation."""


class TruncationError(BerryThermError):
    """A truncated Fock space would exceed its configured cap."""


class ConstraintViolation(BerryThermError, ValueError):
    """A dressing frame violates the diagonalization constraints."""


class BranchError(BerryThermError, ValueError):
    """An inverse hyperbolic function is evaluated off its principal branch."""


class ConvergenceError(BerryThermError):
    """An iterative procedure failed to reach its tolerance."""


class DegeneracyError(BerryThermError):
    """A tracked eigenvalue comes too close to a neighbouring level."""


class IntegrationError(BerryThermError):
    """The ODE integrator could not meet its tolerance."""


class OutOfRangeError(BerryThermError, ValueError):
    """A measured phase lies outside the range covered by the sweep."""


class FlatCurveError(BerryThermError):
    """A sensitivity curve has no pronounced maximum."""


class ConfigError(BerryThermError, ValueError):
    """A run configuration could not be parsed or validated."""


class TruncationWarning(RuntimeWarning):
    """Probability leaks through the edge of a truncated Fock space."""


class SaturationWarning(RuntimeWarning):
    """A thermal parameter is so large that results are unreliable."""
