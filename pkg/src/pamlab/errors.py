"""Exception hierarchy shared by all subpackages."""


class PamError(Exception):
    """Base class for every error raised by pamlab."""


class ParameterError(PamError, ValueError):
    """Invalid input parameter; ``field`` names the offending argument."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(PamError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(PamError, IndexError):
    """Lattice point or window outside the available box."""


class NumericError(PamError, ArithmeticError):
    """A numerical routine failed to reach its tolerance.

    ``diagnostics`` carries whatever the routine knew at failure time
    (achieved tolerance, residual norms, step counts).
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class CalibrationError(NumericError):
    """Scale-function calibration found no sign change in its bracket."""


class ProfileError(PamError, ValueError):
    """Scaling profile violates a monotonicity requirement."""


class FitError(NumericError):
    """Lifshitz fit impossible (empty window, zero counts)."""


class ConstructionError(PamError, RuntimeError):
    """An object failed its own invariant checks at construction."""
