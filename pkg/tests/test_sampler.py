"""Generic MCMC engine, diagnostics, quantiles, and persistence."""

import math

import numpy as np
import pytest
from scipy.special import expit

from recocurve.sampler import (
    PosteriorSamples,
    SamplerConfig,
    SamplerError,
    gelman_rubin,
    load_samples,
    max_gelman_rubin,
    posterior_quantiles,
    run_mcmc,
    save_samples,
    write_summary,
)


def _std_normal(v):
    return float(-0.5 * np.sum(v**2))


@pytest.fixture(scope="module")
def normal_run():
    config = SamplerConfig(n_chains=4, n_warmup=500, n_keep=2500, seed=0)
    return run_mcmc(_std_normal, np.zeros(1), config, param_names=["x"])


class TestRunMcmc:
    def test_standard_normal_moments(self, normal_run):
        pooled = normal_run.pooled("x")
        assert -0.1 < pooled.mean() < 0.1
        assert 0.9 < pooled.std() < 1.1

    def test_acceptance_in_band(self, normal_run):
        for rate in normal_run.acceptance.values():
            assert 0.15 < rate < 0.7

    def test_beta_target_through_logit(self):
        # Beta(1.5, 1.5) sampled in logit space with the change-of-variable
        # term; quadrature oracle: symmetric, mean 1/2.
        def log_density(v):
            x = float(expit(v[0]))
            return 0.5 * math.log(x) + 0.5 * math.log1p(-x) \
                + math.log(x) + math.log1p(-x)

        config = SamplerConfig(n_chains=4, n_warmup=500, n_keep=2500, seed=1)
        out = run_mcmc(log_density, np.zeros(1), config, param_names=["u"])
        draws = expit(out.pooled("u"))
        assert abs(draws.mean() - 0.5) < 0.02

    def test_determinism(self):
        config = SamplerConfig(n_chains=2, n_warmup=100, n_keep=200, seed=3)
        a = run_mcmc(_std_normal, np.zeros(2), config)
        b = run_mcmc(_std_normal, np.zeros(2), config)
        for name in a.names:
            np.testing.assert_array_equal(a.draws[name], b.draws[name])

    def test_nonfinite_init_rejected(self):
        config = SamplerConfig(n_chains=1, n_warmup=10, n_keep=10, seed=0)
        with pytest.raises(SamplerError):
            run_mcmc(lambda v: float("-inf"), np.zeros(1), config)

    def test_blocks_and_names(self):
        config = SamplerConfig(n_chains=2, n_warmup=50, n_keep=50, seed=0)
        out = run_mcmc(_std_normal, np.zeros(3), config,
                       blocks=[np.array([0, 1]), np.array([2])],
                       param_names=["a", "b", "c"])
        assert out.names == ["a", "b", "c"]
        assert set(out.acceptance) == {"block_0", "block_1"}

    def test_initial_point_count_mismatch(self):
        config = SamplerConfig(n_chains=3, n_warmup=10, n_keep=10, seed=0)
        with pytest.raises(SamplerError):
            run_mcmc(_std_normal, np.zeros((2, 1)), config)


class TestConfigValidation:
    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            SamplerConfig(n_chains=0)
        with pytest.raises(ValueError):
            SamplerConfig(n_keep=0)
        with pytest.raises(ValueError):
            SamplerConfig(target_accept=1.0)


class TestGelmanRubin:
    def test_identical_chains(self):
        chain = np.random.default_rng(0).standard_normal(500)
        samples = PosteriorSamples(draws={"x": np.tile(chain, (4, 1))})
        r = gelman_rubin(samples, "x")
        assert r == pytest.approx(math.sqrt(499.0 / 500.0))
        assert r < 1.0

    def test_converged_normal_chains(self, normal_run):
        assert gelman_rubin(normal_run, "x") < 1.05
        assert max_gelman_rubin(normal_run) < 1.05

    def test_disjoint_constants(self):
        samples = PosteriorSamples(draws={"x": np.vstack([np.zeros(100), np.ones(100)])})
        assert gelman_rubin(samples, "x") > 1.2

    def test_requirements(self):
        with pytest.raises(SamplerError):
            gelman_rubin(PosteriorSamples(draws={"x": np.zeros((1, 100))}), "x")
        with pytest.raises(SamplerError):
            gelman_rubin(PosteriorSamples(draws={"x": np.zeros((4, 5))}), "x")


class TestQuantiles:
    def test_constant(self):
        samples = PosteriorSamples(draws={"x": np.full((2, 50), 3.25)})
        np.testing.assert_allclose(posterior_quantiles(samples, "x", [0.1, 0.5, 0.9]), 3.25)

    def test_midpoint_interpolation(self):
        samples = PosteriorSamples(draws={"x": np.arange(1.0, 101.0).reshape(1, 100)})
        assert posterior_quantiles(samples, "x", [0.5])[0] == pytest.approx(50.5)

    def test_monotone_in_q(self, normal_run):
        qs = posterior_quantiles(normal_run, "x", [0.1, 0.25, 0.5, 0.75, 0.9])
        assert np.all(np.diff(qs) >= 0)


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        samples = PosteriorSamples(draws={"a": rng.standard_normal((2, 30)),
                                          "b": rng.standard_normal((2, 30))})
        path = tmp_path / "samples.ndjson"
        save_samples(samples, path)
        loaded = load_samples(path)
        assert loaded.names == ["a", "b"]
        for name in samples.names:
            np.testing.assert_allclose(loaded.draws[name], samples.draws[name])

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.ndjson"
        path.write_text("")
        with pytest.raises(SamplerError):
            load_samples(path)

    def test_summary(self, tmp_path, normal_run):
        path = tmp_path / "summary.json"
        summary = write_summary(normal_run, path, extra={"tag": "t"})
        assert summary["max_r_hat"] < 1.05
        assert summary["tag"] == "t"
        assert path.exists()
        import json
        on_disk = json.loads(path.read_text())
        assert on_disk["n_chains"] == 4 and on_disk["n_keep"] == 2500
