"""Registered target functions and design densities with analytic derivatives.

The bias formula and the theoretical risk integrals need m, m', m'', f, f', f''
as closures; everything downstream looks them up here by name.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RegressionFunction:
    name: str
    fn: callable
    deriv: callable
    deriv2: callable

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class DensityModel:
    name: str
    pdf: callable
    deriv: callable
    deriv2: callable
    quantile: callable

    def __call__(self, x):
        return self.pdf(np.asarray(x, dtype=float))

    def central_support(self, mass=0.98):
        half_tail = (1.0 - mass) / 2.0
        return float(self.quantile(half_tail)), float(self.quantile(1.0 - half_tail))


def _normal_pdf(x):
    return np.exp(-0.5 * x * x) / math.sqrt(TWO_PI)


REGRESSION_FUNCTIONS = {
    "sin2pi": RegressionFunction(
        "sin2pi",
        lambda x: np.sin(TWO_PI * x),
        lambda x: TWO_PI * np.cos(TWO_PI * x),
        lambda x: -(TWO_PI**2) * np.sin(TWO_PI * x),
    ),
    "identity": RegressionFunction(
        "identity",
        lambda x: np.asarray(x, dtype=float),
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    ),
    "quadratic": RegressionFunction(
        "quadratic",
        lambda x: np.asarray(x, dtype=float) ** 2,
        lambda x: 2.0 * np.asarray(x, dtype=float),
        lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
    ),
    "constant": RegressionFunction(
        "constant",
        lambda x: np.ones_like(np.asarray(x, dtype=float)),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    ),
}

DENSITIES = {
    "standard-normal": DensityModel(
        "standard-normal",
        _normal_pdf,
        lambda x: -x * _normal_pdf(x),
        lambda x: (x * x - 1.0) * _normal_pdf(x),
        lambda p: ndtri(p),
    ),
    "uniform01": DensityModel(
        "uniform01",
        lambda x: np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        lambda p: p,
    ),
}


def get_true_function(name):
    if isinstance(name, RegressionFunction):
        return name
    try:
        return REGRESSION_FUNCTIONS[name]
    except KeyError:
        raise ValueError(f"unknown regression function {name!r}") from None


def get_density(name):
    if isinstance(name, DensityModel):
        return name
    try:
        return DENSITIES[name]
    except KeyError:
        raise ValueError(f"unknown density {name!r}") from None


_FULL_MASS = 1.0 - 2e-12


def density_weighted_mean(function, density, mass=_FULL_MASS):
    """integral of m(x) f(x) dx, the shape-function offset."""
    m = get_true_function(function)
    f = get_density(density)
    lo, hi = f.central_support(mass)
    value, _ = quad(lambda x: float(m(x)) * float(f(x)), lo, hi, epsrel=1e-10, limit=400)
    return value


def predictor_moment(function, density, mass=_FULL_MASS):
    """E[m(X) X], the constant scaling the predictor-memory risk term."""
    m = get_true_function(function)
    f = get_density(density)
    lo, hi = f.central_support(mass)
    value, _ = quad(lambda x: float(m(x)) * x * float(f(x)), lo, hi, epsrel=1e-10, limit=400)
    return value


def gaussian_central_mass(lo, hi):
    return float(ndtr(hi) - ndtr(lo))
