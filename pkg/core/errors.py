from typing import Any, Optional


class SpectralError(Exception):
    """Base class for every error raised by the toolkit"""


class InvalidDimensionError(SpectralError, ValueError):
    """Algebra or spatial dimension outside the supported range"""


class InvalidDomainError(SpectralError, ValueError):
    """Box or grid that violates its geometry's requirements"""


class InvalidParamsError(SpectralError, ValueError):
    """Physical or numerical parameters outside their admissible range"""


class GridMismatchError(SpectralError, ValueError):
    """Operands living on different grids or dimensions"""


class DegreeOverflowError(SpectralError, ValueError):
    """Polynomial degree exceeded the configured cap"""


class NoBoundError(SpectralError, ValueError):
    """The requested bound is not certified at this s"""


class SingularSystemError(SpectralError, RuntimeError):
    """Factorization hit a vanishing pivot; s may be close to the S-spectrum"""

    def __init__(self, message: str, pivot_min: float = 0.0, report: Optional[Any] = None):
        super().__init__(message)
        self.pivot_min = pivot_min
        self.report = report


class ConvergenceError(SpectralError, RuntimeError):
    """Iteration stopped before reaching its tolerance"""

    def __init__(self, message: str, last_iterate: Optional[float] = None, iterations: int = 0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations
