"""Log-log slope fitting for rate and scaling checks."""

from dataclasses import dataclass

import numpy as np

from .validation import as_float_array


@dataclass(frozen=True)
class ScalingFit:
    """OLS fit of log(y) on log(x): y ~ C * x^slope."""

    slope: float
    intercept: float
    stderr: float
    r_squared: float


def fit_loglog_slope(x, y):
    """Least-squares slope of log y versus log x.

    Both arrays must be positive; at least three points are required so the
    standard error is defined.
    """
    x = as_float_array(x, "x", min_len=3)
    y = as_float_array(y, "y", min_len=3)
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit requires strictly positive values")
    lx, ly = np.log(x), np.log(y)
    design = np.column_stack([np.ones_like(lx), lx])
    coef, *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ coef
    resid = ly - fitted
    dof = x.size - 2
    sxx = np.sum((lx - lx.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if dof > 0 and sxx > 0 else float("nan")
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = float(1.0 - np.sum(resid**2) / total) if total > 0 else 1.0
    return ScalingFit(slope=float(coef[1]), intercept=float(coef[0]), stderr=stderr, r_squared=r2)
