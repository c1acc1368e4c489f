"""Mode/spread beta and gamma families against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from recocurve.dists import (
    DistParameterError,
    ModeSpreadBeta,
    ModeSpreadGamma,
    beta_to_standard,
    gamma_to_standard,
    log_pdf_beta,
    log_pdf_gamma,
    sample_beta,
    sample_gamma,
)


def count_local_maxima(values: np.ndarray, tol: float = 1e-9) -> int:
    """Strict local maxima of a sampled function, merging flat plateaus."""
    d = np.diff(values)
    signs = [s for s in np.sign(np.where(np.abs(d) < tol, 0.0, d)) if s != 0.0]
    count = 0
    for prev, cur in zip(signs, signs[1:]):
        if prev > 0 and cur < 0:
            count += 1
    # Monotone-increasing-then-flat etc: a single rise followed by no fall is
    # a boundary maximum, which the interior-mode families never produce.
    return count


class TestBetaConversion:
    def test_symmetric_case(self):
        assert beta_to_standard(0.5, 0.5) == pytest.approx((1.5, 1.5))

    def test_hand_case(self):
        assert beta_to_standard(0.25, 0.5) == pytest.approx((1.25, 1.75))

    def test_flat_limit(self):
        alpha, beta = beta_to_standard(0.25, 1.0 - 1e-12)
        assert alpha == pytest.approx(1.0, abs=1e-9)
        assert beta == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("m,phi", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0),
                                       (0.5, 1.0), (-0.1, 0.5), (0.5, 1.5),
                                       (float("nan"), 0.5)])
    def test_rejections(self, m, phi):
        with pytest.raises(DistParameterError):
            beta_to_standard(m, phi)
        with pytest.raises(DistParameterError):
            ModeSpreadBeta(m=m, phi=phi)

    def test_converted_shapes_exceed_one(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            alpha, beta = beta_to_standard(rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99))
            assert alpha > 1.0 and beta > 1.0


class TestGammaConversion:
    def test_hand_cases(self):
        assert gamma_to_standard(15.0, 0.5) == pytest.approx((2.0, 1.0 / 15.0))
        alpha, beta = gamma_to_standard(5.0, 0.2)
        assert (alpha, beta) == pytest.approx((5.0, 0.8))
        assert (alpha - 1.0) / beta == pytest.approx(5.0)  # mode = (alpha-1)/rate

    @pytest.mark.parametrize("m,phi", [(15.0, 1.0), (0.0, 0.5), (-1.0, 0.5), (5.0, 0.0)])
    def test_rejections(self, m, phi):
        with pytest.raises(DistParameterError):
            gamma_to_standard(m, phi)
        with pytest.raises(DistParameterError):
            ModeSpreadGamma(m=m, phi=phi)


class TestDensities:
    def test_closed_form_beta_value(self):
        # Beta(1.5, 1.5) at 1/2 has density 4/pi.
        val = log_pdf_beta(0.5, ModeSpreadBeta(m=0.5, phi=0.5))
        assert val == pytest.approx(math.log(4.0 / math.pi), abs=1e-12)
        assert val == pytest.approx(0.2416, abs=1e-4)

    def test_mode_maximizes_beta_density(self):
        rng = np.random.default_rng(1)
        grid = np.linspace(1e-4, 1.0 - 1e-4, 2001)
        for _ in range(50):
            dist = ModeSpreadBeta(m=float(rng.uniform(0.05, 0.95)),
                                  phi=float(rng.uniform(0.05, 0.95)))
            assert log_pdf_beta(dist.m, dist) >= np.max(log_pdf_beta(grid, dist)) - 1e-9

    def test_mode_maximizes_gamma_density(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            dist = ModeSpreadGamma(m=float(rng.uniform(0.5, 20.0)),
                                   phi=float(rng.uniform(0.05, 0.95)))
            grid = np.linspace(1e-4, 5.0 * dist.m, 2001)
            assert log_pdf_gamma(dist.m, dist) >= np.max(log_pdf_gamma(grid, dist)) - 1e-9

    def test_quadrature_normalization(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            dist = ModeSpreadBeta(m=float(rng.uniform(0.05, 0.95)),
                                  phi=float(rng.uniform(0.05, 0.95)))
            total, _ = integrate.quad(lambda x: math.exp(log_pdf_beta(x, dist)), 0.0, 1.0)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_support_boundaries(self):
        dist = ModeSpreadBeta(m=0.3, phi=0.3)
        assert log_pdf_beta(0.0, dist) == -np.inf
        assert log_pdf_beta(1.0, dist) == -np.inf
        assert log_pdf_beta(-0.5, dist) == -np.inf
        gd = ModeSpreadGamma(m=3.0, phi=0.3)
        assert log_pdf_gamma(0.0, gd) == -np.inf
        assert log_pdf_gamma(-1.0, gd) == -np.inf

    def test_matches_scipy(self):
        dist = ModeSpreadBeta(m=0.25, phi=0.5)
        alpha, beta = dist.to_standard()
        x = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(log_pdf_beta(x, dist),
                                   stats.beta.logpdf(x, alpha, beta), atol=1e-10)
        gd = ModeSpreadGamma(m=5.0, phi=0.2)
        ga, gb = gd.to_standard()
        xg = np.linspace(0.1, 20.0, 25)
        np.testing.assert_allclose(log_pdf_gamma(xg, gd),
                                   stats.gamma.logpdf(xg, ga, scale=1.0 / gb), atol=1e-10)


class TestSampling:
    def test_beta_ks_against_cdf(self):
        dist = ModeSpreadBeta(m=0.25, phi=0.5)
        alpha, beta = dist.to_standard()
        draws = sample_beta(dist, np.random.default_rng(7), size=100_000)
        stat = stats.kstest(draws, lambda x: stats.beta.cdf(x, alpha, beta)).statistic
        assert stat < 0.01

    def test_gamma_histogram_mode(self):
        dist = ModeSpreadGamma(m=15.0, phi=0.1)
        draws = sample_gamma(dist, np.random.default_rng(8), size=1_000_000)
        counts, edges = np.histogram(draws, bins=300, range=(0.0, 45.0))
        centers = 0.5 * (edges[:-1] + edges[1:])
        assert abs(centers[np.argmax(counts)] - 15.0) / 15.0 < 0.05

    def test_determinism(self):
        dist = ModeSpreadBeta(m=0.4, phi=0.3)
        d1 = sample_beta(dist, np.random.default_rng(9), size=100)
        d2 = sample_beta(dist, np.random.default_rng(9), size=100)
        np.testing.assert_array_equal(d1, d2)
        gd = ModeSpreadGamma(m=4.0, phi=0.3)
        g1 = sample_gamma(gd, np.random.default_rng(9), size=100)
        g2 = sample_gamma(gd, np.random.default_rng(9), size=100)
        np.testing.assert_array_equal(g1, g2)


class TestProperties:
    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_beta_unimodal(self, m, phi):
        dist = ModeSpreadBeta(m=m, phi=phi)
        grid = np.linspace(1e-5, 1.0 - 1e-5, 2000)
        assert count_local_maxima(log_pdf_beta(grid, dist)) <= 1

    @given(st.floats(0.1, 30.0), st.floats(0.01, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_gamma_unimodal(self, m, phi):
        dist = ModeSpreadGamma(m=m, phi=phi)
        alpha, beta = dist.to_standard()
        hi = float(stats.gamma.ppf(0.9999, alpha, scale=1.0 / beta))
        grid = np.linspace(1e-6, hi, 2000)
        assert count_local_maxima(log_pdf_gamma(grid, dist)) <= 1

    @given(st.floats(0.05, 0.95), st.floats(0.05, 0.45), st.floats(0.5, 0.95))
    @settings(max_examples=100, deadline=None)
    def test_beta_variance_increases_in_spread(self, m, phi_lo, phi_hi):
        a1, b1 = beta_to_standard(m, phi_lo)
        a2, b2 = beta_to_standard(m, phi_hi)
        assert stats.beta.var(a2, b2) > stats.beta.var(a1, b1)

    @given(st.floats(0.5, 20.0), st.floats(0.05, 0.45), st.floats(0.5, 0.95))
    @settings(max_examples=100, deadline=None)
    def test_gamma_variance_increases_in_spread(self, m, phi_lo, phi_hi):
        a1, b1 = gamma_to_standard(m, phi_lo)
        a2, b2 = gamma_to_standard(m, phi_hi)
        assert stats.gamma.var(a2, scale=1.0 / b2) > stats.gamma.var(a1, scale=1.0 / b1)
