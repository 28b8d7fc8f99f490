"""Input validation helpers shared by the estimators and pure functions."""

import numpy as np

from .exceptions import ContextTooShort, DimensionMismatch, InvalidDistribution


def as_float_matrix(x, name="values"):
    """Coerce ``x`` to a finite float64 matrix of shape (T, d).

    Accepts anything with a ``values`` attribute (a TimeSeries), plain
    arrays, and nested sequences.  One-dimensional input becomes a single
    column.
    """
    if hasattr(x, "values") and not isinstance(x, np.ndarray):
        x = x.values
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1- or 2-dimensional, got ndim={arr.ndim}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def as_float_vector(x, dim=None, name="vector"):
    arr = np.asarray(x, dtype=np.float64).ravel()
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains NaN or infinite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {dim}")
    return arr


def check_context(context, dims, min_rows=1, name="context"):
    ctx = as_float_matrix(context, name)
    if ctx.shape[1] != dims:
        raise DimensionMismatch(f"{name} has width {ctx.shape[1]}, expected {dims}")
    if ctx.shape[0] < min_rows:
        raise ContextTooShort(
            f"{name} has {ctx.shape[0]} rows, need at least {min_rows}"
        )
    return ctx


def check_probability_vector(pi, name="pi", strict_positive=False, atol=1e-12):
    p = np.asarray(pi, dtype=np.float64).ravel()
    if p.size == 0 or not np.isfinite(p).all():
        raise InvalidDistribution(f"{name} must be a nonempty finite vector")
    if (p < 0).any() or (strict_positive and (p <= 0).any()):
        bound = "strictly positive" if strict_positive else "nonnegative"
        raise InvalidDistribution(f"{name} must be {bound}")
    if abs(p.sum() - 1.0) > atol:
        raise InvalidDistribution(f"{name} sums to {p.sum()!r}, expected 1")
    return p


def check_row_stochastic(P, name="P", atol=1e-12, square=True):
    m = np.asarray(P, dtype=np.float64)
    if m.ndim != 2 or (square and m.shape[0] != m.shape[1]):
        shape = "a square matrix" if square else "a matrix"
        raise InvalidDistribution(f"{name} must be {shape}")
    if not np.isfinite(m).all() or (m < 0).any():
        raise InvalidDistribution(f"{name} must have finite nonnegative entries")
    if np.abs(m.sum(axis=1) - 1.0).max() > atol:
        raise InvalidDistribution(f"{name} rows must sum to 1")
    return m
