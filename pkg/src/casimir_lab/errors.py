"""Exception types shared across the package.

Every error that callers are expected to branch on gets its own class;
plain ``ValueError`` is reserved for argument preconditions (negative
separations, empty arrays and the like).
"""

__all__ = [
    "CasimirLabError",
    "ValidationError",
    "ConvergenceError",
    "CalibrationError",
    "DegenerateFitError",
    "RegimeError",
    "PfaValidityWarning",
]


class CasimirLabError(Exception):
    """Base class for package-specific errors."""


class ValidationError(CasimirLabError, ValueError):
    """Malformed input data (tables, CSV files, configuration documents)."""


class ConvergenceError(CasimirLabError, RuntimeError):
    """A numerical scheme failed to reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        Relative tolerance actually reached when the iteration cap hit.
    requested : float
        Relative tolerance that was asked for.
    """

    def __init__(self, message, achieved, requested):
        super().__init__(f"{message} (achieved {achieved:.3e}, requested {requested:.3e})")
        self.achieved = float(achieved)
        self.requested = float(requested)


class CalibrationError(CasimirLabError, ValueError):
    """A voltage sweep cannot be inverted to a separation (non-positive curvature)."""


class DegenerateFitError(CasimirLabError, ValueError):
    """The least-squares design matrix is rank deficient."""


class RegimeError(CasimirLabError, ValueError):
    """Inputs are outside the validity regime of a perturbative formula."""


class PfaValidityWarning(UserWarning):
    """The proximity force approximation is being stretched (d/R too large)."""
