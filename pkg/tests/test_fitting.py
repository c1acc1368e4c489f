"""Structured model fit and posterior-predictive machinery."""

import numpy as np
import pytest

from recocurve.fitting import (
    fit_model,
    posterior_median_curve,
    posterior_predictive_curves,
    posterior_predictive_shapes,
    shared_from_draws,
)
from recocurve.model import Hyperparameters
from recocurve.sampler import SamplerConfig, max_gelman_rubin
from recocurve.simulate import default_hyperparameters


@pytest.fixture(scope="module")
def small_fit(tiny_sim_dataset):
    config = SamplerConfig(n_chains=2, n_warmup=400, n_keep=400, seed=0)
    return fit_model(tiny_sim_dataset, default_hyperparameters(), config)


class TestFitModel:
    def test_expected_parameters_present(self, small_fit):
        assert set(small_fit.names) == {"b_a", "b_b", "b_c", "phi_a", "phi_b",
                                        "phi_c", "theta", "p", "phi_m"}

    def test_draws_in_support(self, small_fit):
        for name in ("phi_a", "phi_b", "phi_c", "theta", "p", "phi_m"):
            pooled = small_fit.pooled(name)
            assert np.all((pooled > 0) & (pooled < 1))

    def test_acceptance_rates_reasonable(self, small_fit):
        for name, rate in small_fit.acceptance.items():
            assert 0.1 < rate < 0.8, f"block {name} acceptance {rate}"

    def test_r_hat_finite(self, small_fit):
        assert np.isfinite(max_gelman_rubin(small_fit))

    def test_deterministic(self, tiny_sim_dataset):
        config = SamplerConfig(n_chains=2, n_warmup=100, n_keep=100, seed=9)
        a = fit_model(tiny_sim_dataset, default_hyperparameters(), config)
        b = fit_model(tiny_sim_dataset, default_hyperparameters(), config)
        for name in a.names:
            np.testing.assert_array_equal(a.draws[name], b.draws[name])

    def test_fixed_spreads_not_sampled(self, tiny_sim_dataset):
        hyper = Hyperparameters(mu_a=0.4, mu_b=0.7, mu_c=5.0,
                                phi_a=0.3, phi_b=0.3, phi_c=0.8)
        config = SamplerConfig(n_chains=2, n_warmup=100, n_keep=100, seed=0)
        samples = fit_model(tiny_sim_dataset, hyper, config)
        assert "phi_a" not in samples.names
        shared = shared_from_draws(samples, tiny_sim_dataset.k, hyper)
        np.testing.assert_allclose(shared["phi_a"], 0.3)
        np.testing.assert_allclose(shared["phi_c"], 0.8)

    def test_patient_params_stored_on_request(self, tiny_sim_dataset):
        config = SamplerConfig(n_chains=2, n_warmup=50, n_keep=50, seed=0)
        samples = fit_model(tiny_sim_dataset, default_hyperparameters(), config,
                            store_patient_params=True)
        n = tiny_sim_dataset.n
        assert f"a[{n - 1}]" in samples.names
        assert np.all((samples.pooled("a[0]") > 0) & (samples.pooled("a[0]") < 1))
        assert np.all(samples.pooled(f"c[{n - 1}]") > 0)


class TestPosteriorPredictive:
    def test_shape_draws_in_support(self, small_fit):
        rng = np.random.default_rng(0)
        a, b, c, sel = posterior_predictive_shapes(small_fit, default_hyperparameters(),
                                                   np.array([0.3]), rng)
        assert np.all((a > 0) & (a < 1))
        assert np.all((b > 0) & (b < 1))
        assert np.all(c > 0)
        assert len(sel) == small_fit.n_chains * small_fit.n_keep

    def test_subsampling(self, small_fit):
        rng = np.random.default_rng(0)
        a, _, _, sel = posterior_predictive_shapes(small_fit, default_hyperparameters(),
                                                   np.array([0.0]), rng, n_draws=17)
        assert len(a) == 17 and len(sel) == 17

    def test_curves_satisfy_guarantee(self, small_fit):
        rng = np.random.default_rng(1)
        times = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
        s = 0.8
        curves = posterior_predictive_curves(small_fit, default_hyperparameters(),
                                             np.array([0.5]), s, times, rng)
        assert np.all((curves >= 0.0) & (curves <= s + 1e-12))
        np.testing.assert_allclose(curves[:, 0], s)
        assert np.all(np.diff(curves[:, 1:], axis=1) >= -1e-12)

    def test_observation_noise_in_unit_interval(self, small_fit):
        rng = np.random.default_rng(2)
        times = np.array([1.0, 6.0, 12.0])
        curves = posterior_predictive_curves(small_fit, default_hyperparameters(),
                                             np.array([0.0]), 1.0, times, rng,
                                             observation_noise=True)
        assert np.all((curves >= 0.0) & (curves <= 1.0))

    def test_median_curve_quantiles_monotone(self, small_fit):
        rng = np.random.default_rng(3)
        times = np.array([0.0, 1.0, 4.0, 12.0, 24.0, 48.0])
        bands = posterior_median_curve(small_fit, default_hyperparameters(),
                                       np.array([0.0]), 0.9, times, rng)
        qs = sorted(bands)
        for lo, hi in zip(qs, qs[1:]):
            assert np.all(bands[lo] <= bands[hi] + 1e-12)
        # Per-draw monotonicity implies monotone per-time quantiles (t > 0).
        for q in qs:
            assert np.all(np.diff(bands[q][1:]) >= -1e-12)
