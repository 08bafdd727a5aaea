"""Moving-average coefficient sequences and their exact second-order oracles.

A truncated MA filter ``eps_i = sum_k c_k eta_{i-k}`` is completely described
by its coefficient array, so autocovariances and partial-sum variances can be
computed exactly from the coefficients alone. Those exact values serve as the
independent oracle against which every Monte Carlo scaling test is run.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .validation import check_count, check_open_interval

# above this work estimate the O(K^2) direct autocovariance switches to FFT
_DIRECT_WORK_LIMIT = 2**22


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Coefficients c_0..c_K of a truncated one-sided moving average.

    ``claimed_alpha`` records the memory exponent the tail is supposed to
    follow (c_k ~ const * k^{-(alpha+1)/2}); it is carried along so scaling
    tests know which slope to expect.
    """

    values: np.ndarray
    claimed_alpha: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("coefficient array must be one-dimensional and non-empty")

    @property
    def order(self):
        return self.values.size - 1

    def sum_sq(self):
        return float(np.dot(self.values, self.values))

    def normalized(self):
        """Rescale so the implied marginal variance sum(c_k^2) equals 1."""
        s = self.sum_sq()
        if s <= 0:
            raise ValueError("cannot normalize an all-zero coefficient sequence")
        return replace(self, values=self.values / np.sqrt(s))

    def shifted_tail(self):
        """The predictable part of the filter: [0, c_1, ..., c_K]."""
        tail = self.values.copy()
        tail[0] = 0.0
        return replace(self, values=tail)

    def tail_rate_drift(self):
        """Max relative drift of c_k * k^{(alpha+1)/2} over the tail third.

        Near zero when the tail actually follows the claimed power law.
        """
        k = np.arange(1, self.values.size)
        if k.size < 3:
            raise ValueError("need at least 3 tail coefficients to assess the rate")
        scaled = np.abs(self.values[1:]) * k ** ((self.claimed_alpha + 1.0) / 2.0)
        tail = scaled[k >= max(1, self.values.size // 3) * 2]
        if tail.size < 2:
            tail = scaled[-2:]
        center = np.median(tail)
        if center == 0:
            raise ValueError("tail coefficients vanish; no rate to assess")
        return float(np.max(np.abs(tail - center) / center))


def linear_lrd_coeffs(alpha, size):
    """Long-memory filter c_0 = 1, c_k = k^{-(alpha+1)/2}, rescaled to unit variance.

    Parameters
    ----------
    alpha : float in (0, 1)
        Memory exponent; partial sums of the filtered series grow like
        n^{2-alpha}.
    size : int >= 2
        Number of retained coefficients K (array has K+1 entries).
    """
    alpha = check_open_interval(alpha, 0.0, 1.0, "alpha")
    size = check_count(size, "size", minimum=2)
    k = np.arange(1, size + 1, dtype=float)
    values = np.concatenate(([1.0], k ** (-(alpha + 1.0) / 2.0)))
    return CoefficientSequence(values, alpha).normalized()


def farima_coeffs(d, size):
    """MA(inf) coefficients of (1-B)^{-d} truncated at ``size`` terms.

    Gamma-ratio recursion: psi_0 = 1, psi_k = psi_{k-1} * (k - 1 + d) / k.
    ``d = 0`` returns the identity filter; negative ``d`` gives the
    antipersistent, sign-alternating decay. Coefficients are returned raw
    (psi_0 = 1, not variance-normalized).
    """
    d = float(d)
    if not abs(d) < 0.5:
        raise ValueError(f"d must satisfy |d| < 0.5, got {d}")
    size = check_count(size, "size", minimum=1)
    values = np.empty(size + 1)
    values[0] = 1.0
    for k in range(1, size + 1):
        values[k] = values[k - 1] * (k - 1 + d) / k
    return CoefficientSequence(values, 1.0 - 2.0 * d)


def autocovariances(coeffs, max_lag):
    """Exact autocovariances gamma(k) = sum_j c_j c_{j+k}, k = 0..max_lag."""
    values = np.asarray(coeffs.values if hasattr(coeffs, "values") else coeffs, dtype=float)
    max_lag = check_count(max_lag, "max_lag", minimum=0) if max_lag else 0
    size = values.size
    if size * min(max_lag + 1, size) <= _DIRECT_WORK_LIMIT:
        gamma = np.zeros(max_lag + 1)
        for k in range(min(max_lag, size - 1) + 1):
            gamma[k] = np.dot(values[: size - k], values[k:])
        return gamma
    full = fftconvolve(values, values[::-1])
    gamma = np.zeros(max_lag + 1)
    upto = min(max_lag, size - 1)
    gamma[: upto + 1] = full[size - 1 : size + upto]
    return gamma


def partial_sum_variance(coeffs, n):
    """Exact Var(sum_{i=1}^n eps_i) for the truncated moving average.

    Brute-force identity Var = n*gamma(0) + 2*sum_{k=1}^{n-1} (n-k) gamma(k);
    this is the reference oracle for every variance-scaling claim.
    """
    n = check_count(n, "n", minimum=1)
    gamma = autocovariances(coeffs, n - 1)
    if n == 1:
        return float(gamma[0])
    k = np.arange(1, n)
    return float(n * gamma[0] + 2.0 * np.dot(n - k, gamma[1:n]))


def sum_variance_constant(coeffs, alpha, n_ref=8192):
    """Finite-sample estimate of C^2 in Var(S_n) ~ C^2 n^{2-alpha}.

    Evaluated from the exact oracle at ``n_ref`` (no Monte Carlo noise).
    """
    n_ref = check_count(n_ref, "n_ref", minimum=2)
    return partial_sum_variance(coeffs, n_ref) / float(n_ref) ** (2.0 - alpha)


def farima_exact_correlations(d, max_lag):
    """Closed-form autocorrelations of the untruncated fractional filter.

    rho(0) = 1, rho(k) = rho(k-1) * (k - 1 + d) / (k - d); no truncation
    error enters, which makes this the sharpest scaling oracle available.
    """
    d = float(d)
    if not abs(d) < 0.5:
        raise ValueError(f"d must satisfy |d| < 0.5, got {d}")
    max_lag = check_count(max_lag, "max_lag", minimum=0) if max_lag else 0
    rho = np.ones(max_lag + 1)
    if max_lag and d != 0.0:
        k = np.arange(1.0, max_lag + 1.0)
        rho[1:] = np.cumprod((k - 1.0 + d) / (k - d))
    elif d == 0.0:
        rho[1:] = 0.0
    return rho


def farima_exact_sum_variance(d, n):
    """Var(sum_{i=1}^n eps_i) of the untruncated, unit-variance fractional filter."""
    n = check_count(n, "n", minimum=1)
    rho = farima_exact_correlations(d, n - 1)
    if n == 1:
        return 1.0
    k = np.arange(1, n)
    return float(n + 2.0 * np.dot(n - k, rho[1:]))
