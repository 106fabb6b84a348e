__author__ = "N2SID developers"
__version__ = "0.1.0"
__status__ = "beta"

"""
Exceptions raised by the identification toolbox.

Two families are distinguished: data/usage errors (wrong dimensions, malformed files, invalid configuration) and
numerical errors (non-convergence, degenerate spectra, ill-conditioned extraction). The command-line front end maps
the first family to exit code 2 and the second one to exit code 3.
"""

from typing import Optional, Any, Dict


class N2SIDError(Exception):
    """Base class of all toolbox errors."""


class DimensionError(N2SIDError, ValueError):
    """Inconsistent matrix or signal dimensions."""


class ConfigurationError(N2SIDError, ValueError):
    """Invalid configuration values."""


class DataFormatError(N2SIDError, ValueError):
    """Malformed data or model file."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NumericalError(N2SIDError, ArithmeticError):
    """Base class of numerical failures."""


class SolverConvergenceError(NumericalError):
    """
    The convex solver did not reach the requested tolerances.

    The iterate of lowest objective is attached as ``solution`` so that callers sweeping over many problems can
    still use it.
    """

    def __init__(
        self,
        message: str,
        iterations: int,
        residuals: Dict[str, float],
        solution: Any = None,
    ):
        super().__init__(message)
        self.iterations = iterations
        self.residuals = residuals
        self.solution = solution


class DegenerateSpectrumError(NumericalError):
    """Fewer than two positive singular values are available for order selection."""


class IllConditionedExtractionError(NumericalError):
    """The shift-invariance least-squares problem is rank deficient."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class UndefinedFitError(NumericalError):
    """The fit criterion is undefined for a constant output channel."""


class GenerationError(NumericalError):
    """Random system generation exhausted its rejection budget."""
