"""Exception types shared across the package."""

import numpy as np


class ConfigError(ValueError):
    """Invalid or unknown configuration field."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a Gram matrix is numerically rank deficient."""


class InfeasibleError(ValueError):
    """Zero-forcing problem has no solution for the given channel."""


class NumericalError(FloatingPointError):
    """Non-finite values appeared in a computation that must stay finite."""
