"""Simulators for the long-memory error and predictor process families.

Families
--------
``iid``                     independent unit-variance innovations
``linear-lrd``              MA(inf) with c_k ~ k^{-(alpha+1)/2}, unit variance
``farima``                  fractionally integrated noise, unit variance
``functional-of-linear``    T(linear value) - E[T], square or |.|^power
``farima-garch``            FARIMA filter driven by GARCH(r, s) innovations
``stochastic-volatility``   eps_i = Z_i * R_i with R_i a long-memory level
``larch``                   eps_i = Z_i * R_i with R_i = a + sum c_k eps_{i-k}

Every simulator is a pure function of its spec: identical specs give
bit-identical output. Innovation streams are indexed backwards from the last
output time, so enlarging ``burn_in`` extends the presample past without
shifting the innovations that drive the retained window. For the convolution
families this makes the output exactly independent of ``burn_in`` (given
``burn_in >= truncation``); for the recursive families it isolates the pure
initialization error, which the burn-in tests measure.

Each run also carries the closed-form conditional mean E[eps_i | past] used by
the condition diagnostics, so no numeric conditioning is ever needed.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve

from .coefficients import (
    CoefficientSequence,
    farima_coeffs,
    linear_lrd_coeffs,
    partial_sum_variance,
)
from .innovations import InnovationSpec, draw_innovations
from .validation import check_count, check_positive

FAMILIES = (
    "iid",
    "linear-lrd",
    "farima",
    "functional-of-linear",
    "farima-garch",
    "stochastic-volatility",
    "larch",
)

DEFAULT_TRUNCATION_FLOOR = 5000

# substream labels: keep the driving noise and any secondary noise disjoint
_STREAM_MAIN = 0
_STREAM_SECONDARY = 1
_STREAM_CENTERING = 2

_DIRECT_CONV_LIMIT = 2**21


def _sliding_dot(series, weights):
    """out[j] = sum_k series[j+k] * weights[k], full windows only."""
    if series.size * weights.size <= _DIRECT_CONV_LIMIT:
        return np.correlate(series, weights, mode="valid")
    return fftconvolve(series, weights[::-1], mode="valid")


@dataclass(frozen=True)
class GarchParams:
    """GARCH(r, s) volatility recursion h_i = a0 + sum a_j eta_{i-j}^2 + sum b_k h_{i-k}."""

    a0: float = 1.0
    arch: tuple = ()
    garch: tuple = ()

    def __post_init__(self):
        check_positive(self.a0, "a0")
        arch = tuple(float(a) for a in self.arch)
        garch = tuple(float(b) for b in self.garch)
        if any(a < 0 for a in arch) or any(b < 0 for b in garch):
            raise ValueError("GARCH coefficients must be nonnegative")
        if sum(arch) + sum(garch) >= 1.0:
            raise ValueError("need sum(arch) + sum(garch) < 1 for stationarity")
        object.__setattr__(self, "arch", arch)
        object.__setattr__(self, "garch", garch)

    @property
    def stationary_variance(self):
        return self.a0 / (1.0 - sum(self.arch) - sum(self.garch))


@dataclass(frozen=True)
class FunctionalParams:
    """Instantaneous transform applied to a linear base process.

    ``square`` is T(u) = u^2 - E[u^2]; ``abs-power`` is T(u) = |u|^power - E|u|^power
    with the centering constant estimated once from a 10^6-draw presample and
    cached for the spec. ``base`` picks the coefficient family of the
    underlying linear process.
    """

    transform: str = "square"
    power: float = 1.0
    base: str = "linear-lrd"

    def __post_init__(self):
        if self.transform not in ("square", "abs-power"):
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.transform == "abs-power" and self.power <= 0:
            raise ValueError("abs-power needs power > 0")
        if self.base not in ("linear-lrd", "farima"):
            raise ValueError("functional base must be linear-lrd or farima")


@dataclass(frozen=True)
class VolatilityParams:
    """Stochastic volatility eps_i = Z_i * (level + sum_{k>=1} c_k eta_{i-k})."""

    level: float = 1.0
    coeff_scale: float = 1.0

    def __post_init__(self):
        check_positive(self.level, "level")
        check_positive(self.coeff_scale, "coeff_scale")


@dataclass(frozen=True)
class LarchParams:
    """LARCH feedback eps_i = Z_i * R_i, R_i = level + sum c_k eps_{i-k}.

    ``feedback_sq`` is the target sum of squared feedback coefficients; the
    stationarity condition requires it to be < 1.
    """

    level: float = 1.0
    feedback_sq: float = 0.5

    def __post_init__(self):
        check_positive(self.level, "level")
        if not (0.0 <= self.feedback_sq < 1.0):
            raise ValueError("need sum of squared LARCH coefficients < 1 for stationarity")


@dataclass(frozen=True)
class ProcessSpec:
    """Recipe for an error process.

    ``alpha`` is the partial-sum variance exponent: Var(S_n) ~ n^{2-alpha}.
    ``alpha = 1`` means i.i.d.; the FARIMA families also admit alpha in (1, 2)
    (antipersistence, d < 0). The fractional-differencing order d = (1-alpha)/2
    is exposed as a derived property. ``truncation``/``burn_in`` default to
    max(5000, n) at simulation time.

    ``scaling`` fixes the convolution-coefficient convention:
    ``unit-variance`` (default) rescales so the marginal variance is exactly
    1 at the truncated horizon; ``unit-innovation`` keeps the raw filter
    (leading coefficient 1, unit innovation variance), so the marginal
    variance grows with the memory strength like classical fractional-noise
    generators.
    """

    family: str = "iid"
    alpha: float = 1.0
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    truncation: int = None
    burn_in: int = None
    params: object = None
    scaling: str = "unit-variance"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown process family {self.family!r}")
        if self.scaling not in ("unit-variance", "unit-innovation"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        hi = 2.0 if self.family in ("farima", "farima-garch") else 1.0
        if not (0.0 < self.alpha <= hi):
            raise ValueError(f"alpha must lie in (0, {hi}] for family {self.family}")
        if self.family == "iid" and self.alpha != 1.0:
            raise ValueError("iid family requires alpha = 1")
        if self.family in ("linear-lrd", "stochastic-volatility", "larch") and self.alpha == 1.0:
            raise ValueError(f"{self.family} requires alpha < 1; use family='iid' instead")
        if self.truncation is not None:
            check_count(self.truncation, "truncation", minimum=1)
            if self.burn_in is not None and self.burn_in < self.truncation:
                raise ValueError("burn_in must be >= truncation")
        defaults = {
            "functional-of-linear": FunctionalParams(),
            "farima-garch": GarchParams(),
            "stochastic-volatility": VolatilityParams(),
            "larch": LarchParams(),
        }
        if self.params is None and self.family in defaults:
            object.__setattr__(self, "params", defaults[self.family])

    @property
    def d(self):
        """Fractional-differencing order equivalent to ``alpha``."""
        return (1.0 - self.alpha) / 2.0

    @classmethod
    def from_d(cls, family, d, **kwargs):
        return cls(family=family, alpha=1.0 - 2.0 * float(d), **kwargs)

    def with_seed(self, seed):
        return replace(self, innovation=self.innovation.with_seed(seed))

    def windows(self, n):
        """Resolved (truncation, burn_in) for a length-n simulation."""
        trunc = self.truncation if self.truncation is not None else max(DEFAULT_TRUNCATION_FLOOR, n)
        burn = self.burn_in if self.burn_in is not None else trunc
        if burn < trunc:
            raise ValueError("burn_in must be >= truncation")
        return trunc, burn


@dataclass(frozen=True)
class PredictorSpec:
    """Recipe for the Gaussian predictor sequence (unit marginal variance).

    ``mode="iid"`` draws plain standard normals; ``mode="lrd"`` builds the
    moving average with a_0 = 1, a_k = coeff_scale * k^{-(alpha_x+1)/2},
    globally rescaled to unit variance. Innovations must be Gaussian so the
    marginal law stays normal.
    """

    mode: str = "iid"
    alpha_x: float = 1.0
    coeff_scale: float = 1.0
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    truncation: int = None
    burn_in: int = None

    def __post_init__(self):
        if self.mode not in ("iid", "lrd"):
            raise ValueError(f"unknown predictor mode {self.mode!r}")
        if self.innovation.law != "gaussian":
            raise ValueError("predictors require gaussian innovations")
        if self.mode == "lrd":
            if not (0.0 < self.alpha_x < 1.0):
                raise ValueError("lrd predictors need alpha_x in (0, 1)")
            check_positive(self.coeff_scale, "coeff_scale")
        elif self.alpha_x != 1.0:
            raise ValueError("iid predictors imply alpha_x = 1")

    @property
    def d_x(self):
        return (1.0 - self.alpha_x) / 2.0

    @classmethod
    def from_d(cls, d_x, **kwargs):
        d_x = float(d_x)
        if d_x == 0.0:
            return cls(mode="iid", **kwargs)
        return cls(mode="lrd", alpha_x=1.0 - 2.0 * d_x, **kwargs)

    def with_seed(self, seed):
        return replace(self, innovation=self.innovation.with_seed(seed))

    def coefficients(self, n):
        if self.mode == "iid":
            return CoefficientSequence(np.array([1.0]), 1.0)
        trunc = self.truncation if self.truncation is not None else max(DEFAULT_TRUNCATION_FLOOR, n)
        k = np.arange(1, trunc + 1, dtype=float)
        values = np.concatenate(([1.0], self.coeff_scale * k ** (-(self.alpha_x + 1.0) / 2.0)))
        return CoefficientSequence(values, self.alpha_x).normalized()


@dataclass(frozen=True, eq=False)
class ProcessRun:
    """One simulated path plus the pieces the diagnostics need.

    ``cond_mean`` holds the closed-form E[eps_i | past]; ``predictable`` and
    ``innovations`` are the linear-family decomposition pieces (None when the
    family has no such representation).
    """

    spec: ProcessSpec
    values: np.ndarray
    cond_mean: np.ndarray
    innovations: np.ndarray = None
    predictable: np.ndarray = None
    coeffs: CoefficientSequence = None

    @property
    def cond_diff(self):
        """E[eps_i | past] - eps_i, the negligibility-condition increment."""
        return self.cond_mean - self.values


def _reversed_stream(spec, n, burn_in, stream):
    """Innovations for times (1-burn_in)..n, newest drawn first.

    Position 0 of the raw draw is time n; the array returned is in
    chronological order. Growing ``burn_in`` then prepends older values
    without changing the innovations at retained times.
    """
    raw = draw_innovations(spec, n + burn_in, stream=stream)
    return raw[::-1]


def filter_innovations(coeffs, stream_chrono, n):
    """Apply the one-sided filter to a chronological innovation array.

    ``stream_chrono`` must hold at least n + K values (K = filter order);
    output i (i = 1..n) is sum_k c_k * eta_{i-k} with every window full.
    """
    values = coeffs.values
    need = n + values.size - 1
    if stream_chrono.size < need:
        raise ValueError(
            f"insufficient presample: need {need} innovations, got {stream_chrono.size}"
        )
    out = _sliding_dot(stream_chrono, values[::-1])
    return out[out.size - n :]


def _linear_pieces(coeffs, eta_chrono, n):
    eps = filter_innovations(coeffs, eta_chrono, n)
    predictable = filter_innovations(coeffs.shifted_tail(), eta_chrono, n)
    eta = eta_chrono[eta_chrono.size - n :]
    return eps, predictable, eta


def _family_coeffs(spec, n):
    trunc, _ = spec.windows(n)
    if spec.family == "iid" or (spec.family in ("farima", "farima-garch") and spec.alpha == 1.0):
        return CoefficientSequence(np.array([1.0]), 1.0)
    if spec.family in ("farima", "farima-garch"):
        raw = farima_coeffs(spec.d, trunc)
        return raw if spec.scaling == "unit-innovation" else raw.normalized()
    coeffs = linear_lrd_coeffs(spec.alpha, trunc)
    if spec.scaling == "unit-innovation":
        coeffs = replace(coeffs, values=coeffs.values / coeffs.values[0])
    return coeffs


def simulate_linear(spec, n, stream=()):
    """Simulate the linear / FARIMA / iid families."""
    n = check_count(n, "n", minimum=1)
    coeffs = _family_coeffs(spec, n)
    _, burn = spec.windows(n)
    burn = max(burn, coeffs.order)
    eta_chrono = _reversed_stream(spec.innovation, n, burn, (_STREAM_MAIN,) + tuple(stream))
    eps, predictable, eta = _linear_pieces(coeffs, eta_chrono, n)
    return ProcessRun(
        spec=spec,
        values=eps,
        cond_mean=predictable,
        innovations=eta,
        predictable=predictable,
        coeffs=coeffs,
    )


_CENTERING_DRAWS = 10**6
_centering_cache = {}


def _abs_power_center(spec, coeffs):
    """E|L|^power estimated once from a large presample, cached per spec."""
    key = (spec.innovation, spec.alpha, spec.params.base, coeffs.order, spec.params.power)
    if key not in _centering_cache:
        base_family = spec.params.base if spec.alpha < 1 else "iid"
        probe = replace(spec, family=base_family, params=None)
        run = simulate_linear(probe, _CENTERING_DRAWS, stream=(_STREAM_CENTERING,))
        _centering_cache[key] = float(np.mean(np.abs(run.values) ** spec.params.power))
    return _centering_cache[key]


def simulate_functional(spec, n, stream=()):
    """Instantaneous transform of a linear base process, centered at E[T].

    For the square transform the centering constant is the exact second
    moment sum(c_k^2) of the base filter; the conditional mean
    E[eps_i | past] = P_i^2 - sum_{k>=1} c_k^2 (P_i the predictable part) is
    returned in closed form. ``abs-power`` has no closed-form conditional
    mean; ``cond_mean`` is None for it.
    """
    n = check_count(n, "n", minimum=1)
    base_family = spec.params.base if spec.alpha < 1 else "iid"
    base = replace(spec, family=base_family, params=None)
    run = simulate_linear(base, n, stream=stream)
    coeffs = run.coeffs
    if spec.params.transform == "square":
        total_sq = coeffs.sum_sq()
        tail_sq = total_sq - coeffs.values[0] ** 2
        values = run.values**2 - total_sq
        cond_mean = run.predictable**2 - tail_sq
        return ProcessRun(
            spec=spec,
            values=values,
            cond_mean=cond_mean,
            innovations=run.innovations,
            predictable=run.predictable,
            coeffs=coeffs,
        )
    center = _abs_power_center(spec, coeffs)
    values = np.abs(run.values) ** spec.params.power - center
    return ProcessRun(
        spec=spec,
        values=values,
        cond_mean=None,
        innovations=run.innovations,
        predictable=run.predictable,
        coeffs=coeffs,
    )


def _volatility_warmup(persistence):
    """Steps until a unit volatility perturbation shrinks below 1e-10."""
    if persistence <= 0.0:
        return 64
    return int(min(8192, max(64, math.ceil(math.log(1e-10) / math.log(persistence)))))


def simulate_farima_garch(spec, n, stream=()):
    """FARIMA filter driven by GARCH innovations eta_i = Z_i * h_i^{1/2}.

    The volatility recursion starts at its stationary mean and gets its own
    geometric warm-up margin before the convolution presample begins, so the
    filtered output is insensitive to the burn-in length beyond round-off.
    E[eta_i | past] = 0, so the conditional mean of the output is the
    predictable part of the filter, exactly as in the plain linear case.
    """
    n = check_count(n, "n", minimum=1)
    garch = spec.params
    coeffs = _family_coeffs(spec, n)
    _, burn = spec.windows(n)
    burn = max(burn, coeffs.order)
    warmup = _volatility_warmup(sum(garch.arch) + sum(garch.garch))
    z = _reversed_stream(spec.innovation, n, burn + warmup, (_STREAM_MAIN,) + tuple(stream))
    total = z.size
    r, s = len(garch.arch), len(garch.garch)
    h_bar = garch.stationary_variance
    eta_sq = np.full(total, h_bar)
    h = np.full(total, h_bar)
    eta = np.empty(total)
    arch = np.asarray(garch.arch)
    garch_arr = np.asarray(garch.garch)
    warm = max(r, s)
    eta[:warm] = z[:warm] * math.sqrt(h_bar)
    eta_sq[:warm] = eta[:warm] ** 2
    for t in range(warm, total):
        h_t = garch.a0
        if r:
            h_t += float(np.dot(arch, eta_sq[t - r : t][::-1]))
        if s:
            h_t += float(np.dot(garch_arr, h[t - s : t][::-1]))
        h[t] = h_t
        eta[t] = z[t] * math.sqrt(h_t)
        eta_sq[t] = eta[t] ** 2
    # the warm-up zone only stabilizes the recursion; the filter never sees it
    eps, predictable, eta_out = _linear_pieces(coeffs, eta[warmup:], n)
    return ProcessRun(
        spec=spec,
        values=eps,
        cond_mean=predictable,
        innovations=eta_out,
        predictable=predictable,
        coeffs=coeffs,
    )


def _tail_coeffs(alpha, scale, trunc):
    k = np.arange(1, trunc + 1, dtype=float)
    return scale * k ** (-(alpha + 1.0) / 2.0)


def simulate_stochastic_volatility(spec, n, stream=()):
    """eps_i = Z_i * R_i with R_i = level + sum_{k>=1} c_k eta_{i-k}.

    Z and eta are independent streams derived from the same seed. The output
    is rescaled to unit variance (E[eps^2] = level^2 + sum c_k^2 before the
    rescale). E[eps_i | past] = 0, so the series is white even though R is
    strongly long-memory.
    """
    n = check_count(n, "n", minimum=1)
    params = spec.params
    trunc, burn = spec.windows(n)
    tail = _tail_coeffs(spec.alpha, params.coeff_scale, trunc)
    coeffs = CoefficientSequence(np.concatenate(([0.0], tail)), spec.alpha)
    burn = max(burn, coeffs.order)
    eta = _reversed_stream(spec.innovation, n, burn, (_STREAM_MAIN,) + tuple(stream))
    z = _reversed_stream(spec.innovation, n, 0, (_STREAM_SECONDARY,) + tuple(stream))
    level_part = filter_innovations(coeffs, eta, n)
    r_series = params.level + level_part
    scale = math.sqrt(params.level**2 + float(np.dot(tail, tail)))
    values = z * r_series / scale
    return ProcessRun(spec=spec, values=values, cond_mean=np.zeros(n), coeffs=coeffs)


def simulate_larch(spec, n, stream=()):
    """LARCH recursion eps_i = Z_i R_i, R_i = level + sum_{k>=1} c_k eps_{i-k}.

    Burn-in starts from R = level (zero feedback history). The stationary
    second moment is level^2 / (1 - sum c_k^2); E[eps_i | past] = 0.
    """
    n = check_count(n, "n", minimum=1)
    params = spec.params
    trunc, burn = spec.windows(n)
    raw_tail = _tail_coeffs(spec.alpha, 1.0, trunc)
    raw_sq = float(np.dot(raw_tail, raw_tail))
    tail = raw_tail * math.sqrt(params.feedback_sq / raw_sq) if params.feedback_sq > 0 else raw_tail * 0.0
    z = _reversed_stream(spec.innovation, n, burn, (_STREAM_MAIN,) + tuple(stream))
    total = z.size
    eps = np.empty(total)
    tail_rev = tail[::-1]
    k_max = tail.size
    for t in range(total):
        w = min(k_max, t)
        r_t = params.level
        if w:
            r_t += float(np.dot(tail_rev[k_max - w :], eps[t - w : t]))
        eps[t] = z[t] * r_t
    coeffs = CoefficientSequence(np.concatenate(([0.0], tail)), spec.alpha)
    return ProcessRun(spec=spec, values=eps[total - n :], cond_mean=np.zeros(n), coeffs=coeffs)


_SIMULATORS = {
    "iid": simulate_linear,
    "linear-lrd": simulate_linear,
    "farima": simulate_linear,
    "functional-of-linear": simulate_functional,
    "farima-garch": simulate_farima_garch,
    "stochastic-volatility": simulate_stochastic_volatility,
    "larch": simulate_larch,
}


def simulate_process(spec, n, stream=()):
    """Simulate any error family; returns a :class:`ProcessRun`."""
    return _SIMULATORS[spec.family](spec, n, stream=stream)


def conditional_mean_decomposition(run):
    """Split a linear-family run into (predictable part, innovations).

    The identity eps_i = predictable_i + c_0 * eta_i holds exactly.
    """
    if run.predictable is None or run.innovations is None:
        raise ValueError(f"family {run.spec.family!r} has no linear decomposition")
    return run.predictable, run.innovations


def simulate_predictors(spec, n, stream=()):
    """Gaussian predictor sequence with unit marginal variance."""
    n = check_count(n, "n", minimum=1)
    if spec.mode == "iid":
        return draw_innovations(spec.innovation, n, stream=(_STREAM_MAIN,) + tuple(stream))
    coeffs = spec.coefficients(n)
    trunc = coeffs.order
    burn = spec.burn_in if spec.burn_in is not None else trunc
    burn = max(burn, trunc)
    zeta = _reversed_stream(spec.innovation, n, burn, (_STREAM_MAIN,) + tuple(stream))
    return filter_innovations(coeffs, zeta, n)


def process_sum_variance(spec, n):
    """Exact partial-sum variance oracle evaluated at the spec's coefficients.

    Defined for the convolution families (iid / linear-lrd / farima); for
    other families the coefficient sequence does not determine Var(S_n).
    """
    if spec.family not in ("iid", "linear-lrd", "farima"):
        raise ValueError(f"no coefficient oracle for family {spec.family!r}")
    return partial_sum_variance(_family_coeffs(spec, n), n)
