"""Smoothing kernels and their moments."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr

KERNEL_NAMES = ("epanechnikov", "quartic", "gaussian-truncated")

_GAUSS_CUTOFF = 4.0
_GAUSS_MASS = ndtr(_GAUSS_CUTOFF) - ndtr(-_GAUSS_CUTOFF)


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric probability kernel on [-support, support].

    ``l2_norm`` is the integral of K^2 and ``second_moment`` the integral of
    u^2 K(u); both enter the risk formulas and are stored in closed form
    where available.
    """

    name: str
    support: float
    l2_norm: float
    second_moment: float

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.name == "epanechnikov":
            out = 0.75 * (1.0 - u**2)
        elif self.name == "quartic":
            out = (15.0 / 16.0) * (1.0 - u**2) ** 2
        else:
            out = np.exp(-0.5 * u**2) / (math.sqrt(2.0 * math.pi) * _GAUSS_MASS)
        return np.where(np.abs(u) <= self.support, np.maximum(out, 0.0), 0.0)

    def at_zero(self):
        return float(self(0.0))


def _quad_moments(spec):
    norm = quad(lambda u: float(spec(u)), -spec.support, spec.support, epsabs=1e-12)[0]
    l2 = quad(lambda u: float(spec(u)) ** 2, -spec.support, spec.support, epsabs=1e-12)[0]
    m2 = quad(lambda u: u * u * float(spec(u)), -spec.support, spec.support, epsabs=1e-12)[0]
    return norm, l2, m2


def _build(name):
    if name == "epanechnikov":
        return KernelSpec(name, 1.0, 3.0 / 5.0, 1.0 / 5.0)
    if name == "quartic":
        return KernelSpec(name, 1.0, 5.0 / 7.0, 1.0 / 7.0)
    if name == "gaussian-truncated":
        probe = KernelSpec(name, _GAUSS_CUTOFF, 0.0, 0.0)
        _, l2, m2 = _quad_moments(probe)
        return KernelSpec(name, _GAUSS_CUTOFF, l2, m2)
    raise ValueError(f"unknown kernel {name!r}; choose from {KERNEL_NAMES}")


_CACHE = {}


def get_kernel(name):
    if isinstance(name, KernelSpec):
        return name
    if name not in _CACHE:
        _CACHE[name] = _build(name)
    return _CACHE[name]


def kernel_moments(name):
    """(integral of K^2, integral of u^2 K) for the named kernel."""
    spec = get_kernel(name)
    return spec.l2_norm, spec.second_moment


def quadrature_moments(name):
    """Recompute (mass, l2 norm, second moment) by quadrature, for checks."""
    return _quad_moments(get_kernel(name))
