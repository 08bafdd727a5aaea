import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrdregress.coefficients import (
    CoefficientSequence,
    autocovariances,
    farima_coeffs,
    farima_exact_correlations,
    farima_exact_sum_variance,
    linear_lrd_coeffs,
    partial_sum_variance,
    sum_variance_constant,
)
from lrdregress.slopes import fit_loglog_slope


def brute_force_sum_variance(values, n):
    """Independent oracle: expand Var(sum) through the covariance matrix."""
    g = autocovariances(np.asarray(values, dtype=float), n - 1) if n > 1 else None
    total = 0.0
    for i in range(n):
        for j in range(n):
            k = abs(i - j)
            gk = np.dot(values[: len(values) - k], values[k:]) if k < len(values) else 0.0
            total += gk
    return total


class TestFarimaCoeffs:
    def test_zero_d_is_identity_filter(self):
        c = farima_coeffs(0.0, 12)
        assert c.values[0] == 1.0
        assert np.all(c.values[1:] == 0.0)

    def test_hand_recursion_values(self):
        c = farima_coeffs(0.3, 10)
        assert c.values[1] == pytest.approx(0.3, abs=1e-15)
        assert c.values[2] == pytest.approx(0.195, abs=1e-15)

    @pytest.mark.parametrize("d", [0.1, 0.25, 0.45, -0.2, -0.45])
    def test_first_two_terms_closed_form(self, d):
        c = farima_coeffs(d, 8)
        assert abs(c.values[1] - d) < 1e-12
        assert abs(c.values[2] - d * (1 + d) / 2.0) < 1e-12

    def test_negative_d_alternates_and_decays(self):
        c = farima_coeffs(-0.3, 50).values
        assert c[1] < 0 < c[0]
        assert np.all(np.abs(c[2:]) < np.abs(c[1]))

    @pytest.mark.parametrize("d", [0.5, -0.5, 0.7])
    def test_domain_error(self, d):
        with pytest.raises(ValueError, match="d must"):
            farima_coeffs(d, 10)

    def test_tail_matches_linear_rate(self):
        # psi_k ~ k^{d-1} = k^{-(alpha+1)/2} with alpha = 1 - 2d
        d = 0.3
        c = farima_coeffs(d, 10_000)
        assert c.claimed_alpha == pytest.approx(1.0 - 2.0 * d)
        assert c.tail_rate_drift() < 0.05


class TestLinearLrdCoeffs:
    def test_unit_variance_enforced(self):
        c = linear_lrd_coeffs(0.5, 10_000)
        assert abs(c.sum_sq() - 1.0) < 1e-12

    def test_tail_ratio_constant(self):
        c = linear_lrd_coeffs(0.5, 10_000)
        k = np.arange(3334, 10_001)
        scaled = c.values[k] * k**0.75
        assert np.max(np.abs(scaled - scaled[0]) / scaled[0]) < 0.05

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_domain_error(self, alpha):
        with pytest.raises(ValueError, match="alpha"):
            linear_lrd_coeffs(alpha, 100)


class TestPartialSumVariance:
    def test_iid_value_exact(self):
        c = CoefficientSequence(np.array([1.0]), 1.0)
        assert partial_sum_variance(c, 10) == 10.0

    def test_two_term_hand_value_exact(self):
        # gamma(0) = 2, gamma(1) = 1 -> 2*2 + 2*1 = 6
        c = CoefficientSequence(np.array([1.0, 1.0]), 1.0)
        assert partial_sum_variance(c, 2) == 6.0

    def test_single_observation_is_marginal_variance(self):
        c = CoefficientSequence(np.array([0.8, 0.5]), 1.0)
        assert partial_sum_variance(c, 1) == pytest.approx(0.89, abs=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(
        values=st.lists(st.floats(-2, 2), min_size=1, max_size=6),
        n=st.integers(1, 12),
    )
    def test_matches_covariance_matrix_expansion(self, values, n):
        values = np.asarray(values) + 1e-3  # avoid the all-zero filter
        c = CoefficientSequence(values, 1.0)
        assert partial_sum_variance(c, n) == pytest.approx(
            brute_force_sum_variance(values, n), rel=1e-12, abs=1e-12
        )

    def test_fft_path_agrees_with_direct(self):
        # sizes straddling the internal direct/FFT switch must agree
        c = linear_lrd_coeffs(0.4, 4000)
        big = partial_sum_variance(c, 2048)
        gamma = autocovariances(c.values, 2047)
        k = np.arange(1, 2048)
        ref = 2048 * gamma[0] + 2.0 * np.dot(2048 - k, gamma[1:])
        assert big == pytest.approx(ref, rel=1e-10)
        small = partial_sum_variance(CoefficientSequence(c.values[:50], 0.4), 40)
        assert small == pytest.approx(brute_force_sum_variance(c.values[:50], 40), rel=1e-12)

    def test_truncated_linear_slope_example(self):
        c = linear_lrd_coeffs(0.4, 8192)
        ns = np.array([2.0**k for k in range(8, 14)])
        vs = np.array([partial_sum_variance(c, int(n)) for n in ns])
        assert abs(fit_loglog_slope(ns, vs).slope - 1.6) < 0.05


class TestExactFarimaOracle:
    def test_first_correlation_closed_form(self):
        d = 0.3
        rho = farima_exact_correlations(d, 3)
        assert rho[0] == 1.0
        assert rho[1] == pytest.approx(d / (1 - d), abs=1e-15)

    def test_zero_d_sum_variance_is_n(self):
        assert farima_exact_sum_variance(0.0, 17) == pytest.approx(17.0)

    @pytest.mark.parametrize("alpha", [0.2, 0.4, 0.6, 0.8])
    def test_scaling_slope_is_two_minus_alpha(self, alpha):
        d = (1.0 - alpha) / 2.0
        ns = np.array([2.0**k for k in range(8, 14)])
        vs = np.array([farima_exact_sum_variance(d, int(n)) for n in ns])
        assert abs(fit_loglog_slope(ns, vs).slope - (2.0 - alpha)) < 0.05

    def test_antipersistent_slope_below_one(self):
        ns = np.array([2.0**k for k in range(8, 14)])
        vs = np.array([farima_exact_sum_variance(-0.3, int(n)) for n in ns])
        assert fit_loglog_slope(ns, vs).slope < 1.0


def test_sum_variance_constant_iid_is_one():
    c = CoefficientSequence(np.array([1.0]), 1.0)
    assert sum_variance_constant(c, 1.0, n_ref=512) == pytest.approx(1.0)


def test_normalized_preserves_shape():
    c = CoefficientSequence(np.array([2.0, 1.0, 0.5]), 0.5).normalized()
    assert c.sum_sq() == pytest.approx(1.0, abs=1e-15)
    assert c.values[0] / c.values[1] == pytest.approx(2.0)


def test_shifted_tail_zeroes_leading_term():
    c = CoefficientSequence(np.array([2.0, 1.0, 0.5]), 0.5)
    t = c.shifted_tail()
    assert t.values[0] == 0.0
    assert np.array_equal(t.values[1:], c.values[1:])
