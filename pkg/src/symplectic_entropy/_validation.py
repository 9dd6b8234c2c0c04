"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .errors import DimensionError, DomainError, NumericError


def check_square_even(M, name="M"):
    """Return ``M`` as a finite float array of shape (2n, 2n)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise DimensionError(f"{name} must have even dimension, got {M.shape[0]}")
    if not np.all(np.isfinite(M)):
        raise NumericError(f"{name} has non-finite entries")
    return M


def check_points(X, dim, name="X"):
    """Return ``X`` as a finite 2-D float array with ``dim`` columns.

    A single point of shape (dim,) is promoted to shape (1, dim).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionError(f"{name} must have shape (m, {dim}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NumericError(f"{name} has non-finite entries")
    return X


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_odd(value, name="N"):
    value = check_positive_int(value, name)
    if value % 2 == 0:
        raise DomainError(f"{name} must be odd, got {value}")
    return value


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value}")
    return value
