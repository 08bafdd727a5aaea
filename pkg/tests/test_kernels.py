import numpy as np
import pytest

from lrdregress.kernels import KERNEL_NAMES, get_kernel, kernel_moments, quadrature_moments


def test_epanechnikov_closed_form_moments():
    # integral of (3/4)^2 (1-u^2)^2 = 3/5; integral of u^2 (3/4)(1-u^2) = 1/5
    l2, m2 = kernel_moments("epanechnikov")
    assert l2 == pytest.approx(3.0 / 5.0, abs=1e-15)
    assert m2 == pytest.approx(1.0 / 5.0, abs=1e-15)


def test_quartic_closed_form_moments():
    l2, m2 = kernel_moments("quartic")
    assert l2 == pytest.approx(5.0 / 7.0, abs=1e-15)
    assert m2 == pytest.approx(1.0 / 7.0, abs=1e-15)


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_kernels_integrate_to_one(name):
    mass, _, _ = quadrature_moments(name)
    assert abs(mass - 1.0) < 1e-8


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_stored_moments_match_quadrature(name):
    spec = get_kernel(name)
    _, l2, m2 = quadrature_moments(name)
    assert abs(spec.l2_norm - l2) < 1e-8
    assert abs(spec.second_moment - m2) < 1e-8
    assert spec.l2_norm > 0 and spec.second_moment > 0


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_compact_support_and_symmetry(name):
    spec = get_kernel(name)
    u = np.linspace(-spec.support, spec.support, 301)
    vals = spec(u)
    assert np.all(vals >= 0.0)
    assert np.allclose(vals, vals[::-1])
    assert spec(spec.support + 0.01) == 0.0
    assert spec(-spec.support - 5.0) == 0.0


def test_unknown_kernel_rejected():
    with pytest.raises(ValueError, match="kernel"):
        get_kernel("triangle")
