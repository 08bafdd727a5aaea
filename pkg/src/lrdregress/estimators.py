"""Kernel density and regression estimators.

The regression estimators follow the scikit-learn fit/predict protocol (and
inherit ``get_params``/``set_params``), so they compose with the wider
ecosystem; ``evaluate`` returns the full :class:`EstimateGrid` including the
low-density flags that ``predict`` papers over.

All kernels here have compact support, so sums are taken over sorted-data
windows located with ``searchsorted`` (dense broadcasting is used instead
when the problem is small). Results are independent of which path is taken
up to float round-off, and the path choice depends only on problem size, so
outputs are reproducible.
"""

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .functions import get_density, get_true_function
from .kernels import get_kernel
from .validation import as_float_array, check_positive, check_xy

# grid points whose raw kernel mass falls below n*h*DENSITY_FLOOR_SCALE are
# flagged rather than evaluated; equivalent to a floor of DENSITY_FLOOR_SCALE
# on the density estimate
DENSITY_FLOOR_SCALE = 1e-3

_DENSE_LIMIT = 500_000


@dataclass(eq=False)
class EstimateGrid:
    """Estimator values on a set of evaluation points.

    ``flagged`` marks points where the effective neighborhood was empty
    (kernel mass below the density floor); ``values`` holds ``fill_value``
    there instead of NaN, so downstream arithmetic stays finite.
    """

    points: np.ndarray
    values: np.ndarray
    flagged: np.ndarray
    bandwidth: float
    fill_value: float = 0.0

    @property
    def n_flagged(self):
        return int(np.sum(self.flagged))

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "value", "flagged"])
            for x, v, f in zip(self.points, self.values, self.flagged):
                writer.writerow([repr(float(x)), repr(float(v)), int(f)])

    @classmethod
    def from_csv(cls, path, bandwidth=float("nan")):
        xs, vs, fs = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                xs.append(float(row["x"]))
                vs.append(float(row["value"]))
                fs.append(bool(int(row["flagged"])))
        return cls(np.array(xs), np.array(vs), np.array(fs, dtype=bool), bandwidth)


def kernel_sums(x_sorted, y_sorted, centers, bandwidth, kernel):
    """Raw kernel sums S0 = sum K((c - x_i)/h) and S1 = sum K(...) y_i.

    ``x_sorted`` must be ascending. Returns (S0, S1); S1 is None when
    ``y_sorted`` is None.
    """
    centers = np.asarray(centers, dtype=float)
    h = bandwidth
    halfwidth = kernel.support * h
    n = x_sorted.size
    if n * centers.size <= _DENSE_LIMIT:
        u = (centers[:, None] - x_sorted[None, :]) / h
        w = kernel(u)
        s0 = w.sum(axis=1)
        s1 = w @ y_sorted if y_sorted is not None else None
        return s0, s1
    s0 = np.empty(centers.size)
    s1 = np.empty(centers.size) if y_sorted is not None else None
    lo = np.searchsorted(x_sorted, centers - halfwidth, side="left")
    hi = np.searchsorted(x_sorted, centers + halfwidth, side="right")
    for j in range(centers.size):
        xs = x_sorted[lo[j] : hi[j]]
        if xs.size == 0:
            s0[j] = 0.0
            if s1 is not None:
                s1[j] = 0.0
            continue
        w = kernel((centers[j] - xs) / h)
        s0[j] = w.sum()
        if s1 is not None:
            s1[j] = float(w @ y_sorted[lo[j] : hi[j]])
    return s0, s1


def density_estimate(x, bandwidth, grid, kernel="epanechnikov"):
    """Kernel density estimate (nh)^{-1} sum K((g - x_i)/h) on ``grid``."""
    x = as_float_array(x, "x", min_len=1)
    bandwidth = check_positive(bandwidth, "bandwidth")
    grid = as_float_array(grid, "grid", min_len=1)
    kernel = get_kernel(kernel)
    order = np.argsort(x, kind="stable")
    s0, _ = kernel_sums(x[order], None, grid, bandwidth, kernel)
    values = s0 / (x.size * bandwidth)
    flagged = np.zeros(grid.size, dtype=bool)
    return EstimateGrid(grid, values, flagged, bandwidth)


class NadarayaWatson(BaseEstimator, RegressorMixin):
    """Kernel-weighted local average m(x) = sum y_i K_h(x - x_i) / sum K_h(x - x_i).

    Parameters
    ----------
    bandwidth : float
        Smoothing bandwidth h > 0.
    kernel : str or KernelSpec
        One of the registered kernel shapes.
    density_floor_scale : float
        Evaluation points with raw kernel mass below
        ``n * h * density_floor_scale`` are flagged instead of evaluated.

    ``predict`` fills flagged points with the fitted response mean (the
    estimator's own oversmoothing limit) to honor the NaN-free contract;
    use ``evaluate`` to see the flags.
    """

    def __init__(self, bandwidth=0.1, kernel="epanechnikov", density_floor_scale=DENSITY_FLOOR_SCALE):
        self.bandwidth = bandwidth
        self.kernel = kernel
        self.density_floor_scale = density_floor_scale

    def fit(self, X, y):
        x, y = check_xy(X, y)
        check_positive(self.bandwidth, "bandwidth")
        order = np.argsort(x, kind="stable")
        self.x_ = x[order]
        self.y_ = y[order]
        self.y_mean_ = float(np.mean(y))
        self.kernel_ = get_kernel(self.kernel)
        self.n_ = x.size
        return self

    def _raw_sums(self, points):
        return kernel_sums(self.x_, self.y_, points, self.bandwidth, self.kernel_)

    def _ratio(self, points, s0, s1):
        floor = self.n_ * self.bandwidth * self.density_floor_scale
        flagged = s0 < floor
        values = np.divide(s1, s0, out=np.zeros_like(s1), where=~flagged)
        return values, flagged

    def _fill_value(self):
        return self.y_mean_

    def evaluate(self, points):
        """Full estimate on ``points`` including low-density flags."""
        points = as_float_array(points, "points", min_len=1)
        s0, s1 = self._raw_sums(points)
        values, flagged = self._ratio(points, s0, s1)
        fill = self._fill_value()
        values[flagged] = fill
        return EstimateGrid(points, values, flagged, self.bandwidth, fill_value=fill)

    def predict(self, X):
        return self.evaluate(X).values


class ShapeFunction(NadarayaWatson):
    """Estimator of the response shape m(x) - integral(m f).

    Subtracts the sample mean of the responses (the unbiased estimate of
    integral(m f)) from the local average, which cancels any level shift in
    the responses exactly. Flagged points are filled with 0, the shape
    estimator's own oversmoothing limit.
    """

    def evaluate(self, points):
        points = as_float_array(points, "points", min_len=1)
        s0, s1 = self._raw_sums(points)
        values, flagged = self._ratio(points, s0, s1)
        values = values - self.y_mean_
        values[flagged] = 0.0
        return EstimateGrid(points, values, flagged, self.bandwidth, fill_value=0.0)


_BIAS_DENSITY_FLOOR = 1e-12


def bias_approx(true_function, density, bandwidth, x, kernel="epanechnikov"):
    """Leading smoothing-bias term h^2 * mu2 * (m'' f + 2 m' f') / (2 f).

    ``true_function`` and ``density`` are registry names (or instances) with
    analytic first and second derivatives.
    """
    m = get_true_function(true_function)
    f = get_density(density)
    kernel = get_kernel(kernel)
    bandwidth = check_positive(bandwidth, "bandwidth")
    x = np.asarray(x, dtype=float)
    fx = f(x)
    if np.any(fx < _BIAS_DENSITY_FLOOR):
        raise ValueError("density vanishes at the requested point(s)")
    rho = m.deriv2(x) * fx + 2.0 * m.deriv(x) * f.deriv(x)
    out = bandwidth**2 * kernel.second_moment * rho / (2.0 * fx)
    return float(out) if out.ndim == 0 else out
