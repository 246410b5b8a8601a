"""Exception hierarchy shared by all impa_synth modules."""


class ImpaError(Exception):
    """Base class for every error raised by this package."""


class SolverError(ImpaError):
    """Root finding did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateMinimumError(ImpaError):
    """The solved phase is not a true minimum (c2 <= 0)."""


class NotFoundError(ImpaError):
    """No candidate satisfied the search criterion."""


class TableMissError(ImpaError, KeyError):
    """Prototype table has no row for the requested key."""

    def __str__(self):
        # KeyError would otherwise repr() the message
        return str(self.args[0]) if self.args else ""


class SynthesisError(ImpaError):
    """Element values could not be realized."""


class NetlistError(ImpaError, ValueError):
    """A netlist violates its structural invariants."""


class SingularElementError(ImpaError, ValueError):
    """An element with a zero value has no finite ABCD matrix."""


class PoleError(ImpaError):
    """Z_in = -Z0: the reflection coefficient is singular (oscillation)."""

    def __init__(self, message, frequency=None):
        super().__init__(message)
        self.frequency = frequency


class EmptyBandError(ImpaError):
    """No frequency point reaches the gain threshold."""


class CalibrationError(ImpaError):
    """Target gain is unreachable on the stable side of the oscillation threshold."""

    def __init__(self, message, achievable_db=None):
        super().__init__(message)
        self.achievable_db = achievable_db
