"""Shared input validation helpers."""

import numpy as np


def as_float_array(x, name="x", min_len=1):
    """Coerce to a finite 1-d float array; (n, 1) columns are flattened."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_len:
        raise ValueError(f"{name} needs at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_xy(x, y):
    """Validate a paired regression sample, returning float arrays."""
    x = as_float_array(x, "x", min_len=2)
    y = as_float_array(y, "y", min_len=2)
    if x.size != y.size:
        raise ValueError(f"x and y must have equal length ({x.size} != {y.size})")
    return x, y


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_count(value, name, minimum=1):
    if int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def check_open_interval(value, lo, hi, name):
    value = float(value)
    if not (lo < value < hi):
        raise ValueError(f"{name} must lie in ({lo}, {hi}), got {value}")
    return value
