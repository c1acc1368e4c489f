"""Synthetic data generation and the two simulation experiments.

Experiment 1 (parameter recovery): fit replicated datasets at growing N and
report the mean absolute error of posterior medians against truth.
Experiment 2 (noise robustness): contaminate a base dataset with M patients
whose responses are uniform noise and report the signed error with posterior
quartile bands.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .data import STUDY_MONTHS
from .fitting import fit_model, shared_from_draws
from .model import Dataset, Hyperparameters, SharedParams, bias_terms, clamp_mode
from .sampler import PosteriorSamples, SamplerConfig, max_gelman_rubin
from scipy.special import expit

__all__ = [
    "SimulationSpec",
    "default_true_shared",
    "default_hyperparameters",
    "simulate_dataset",
    "contaminate",
    "recovery_experiment",
    "noise_experiment",
    "shared_truth_values",
]

R_HAT_THRESHOLD = 1.2


def save_sim_dataset(dataset: Dataset, path) -> None:
    """Write a simulated dataset as covariates.csv + observations.csv."""
    from pathlib import Path

    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    cov = pd.DataFrame(dataset.x, columns=[f"x{j}" for j in range(dataset.k)])
    cov.insert(0, "id", [f"sim{i:05d}" for i in range(dataset.n)])
    cov["s"] = dataset.s
    cov.to_csv(root / "covariates.csv", index=False)
    obs = pd.DataFrame({"id": [f"sim{i:05d}" for i in dataset.obs_patient],
                        "month": dataset.obs_t, "value": dataset.obs_y})
    obs.to_csv(root / "observations.csv", index=False)


def load_sim_dataset(path) -> Dataset:
    from pathlib import Path

    root = Path(path)
    cov = pd.read_csv(root / "covariates.csv")
    obs = pd.read_csv(root / "observations.csv")
    ids = {pid: i for i, pid in enumerate(cov["id"])}
    x_cols = [c for c in cov.columns if c.startswith("x")]
    return Dataset(
        x=cov[x_cols].to_numpy(dtype=float),
        s=cov["s"].to_numpy(dtype=float),
        obs_patient=np.array([ids[pid] for pid in obs["id"]]),
        obs_t=obs["month"].to_numpy(dtype=float),
        obs_y=obs["value"].to_numpy(dtype=float),
    )


def default_true_shared(k: int = 1) -> SharedParams:
    """The non-pathological truth used by the simulation studies."""
    b_a = np.zeros(k); b_a[0] = 1.0
    b_b = np.zeros(k); b_b[0] = 2.0
    b_c = np.zeros(k); b_c[0] = 3.0
    return SharedParams(b_a=b_a, b_b=b_b, b_c=b_c,
                        phi_a=0.01, phi_b=0.01, phi_c=0.01,
                        theta=0.1, p=0.3, phi_m=0.01)


def default_hyperparameters() -> Hyperparameters:
    return Hyperparameters(mu_a=0.4, mu_b=0.7, mu_c=5.0,
                           s_a=1.0, s_b=1.0, s_c=1.0,
                           lambda_a=10.0, lambda_b=10.0, lambda_c=10.0, lambda_m=10.0)


@dataclass(frozen=True)
class SimulationSpec:
    shared: SharedParams
    hyper: Hyperparameters
    n_patients: int
    timepoints: tuple = tuple(STUDY_MONTHS)
    k: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_patients < 1:
            raise ValueError("n_patients must be >= 1")
        tp = tuple(float(t) for t in self.timepoints)
        if any(t <= 0 for t in tp) or any(b <= a for a, b in zip(tp, tp[1:])):
            raise ValueError("timepoints must be positive and strictly increasing")
        if self.shared.k != self.k:
            raise ValueError("covariate dimension mismatch")


def _draw_mixture(f, theta, p, phi_m, rng):
    f = clamp_mode(np.asarray(f, dtype=float))
    is_bern = rng.uniform(size=f.shape) < theta
    bern = (rng.uniform(size=f.shape) < p).astype(float)
    s = 1.0 / phi_m - 1.0
    beta_draw = rng.beta(1.0 + s * f, 1.0 + s * (1.0 - f))
    return np.where(is_bern, bern, beta_draw)


def simulate_dataset(spec: SimulationSpec) -> Dataset:
    """Generate a dataset from the model: standard-normal covariates,
    mode/spread draws of (a, b, c), s = 1, mixture observation noise."""
    rng = np.random.default_rng(spec.seed)
    n, k = spec.n_patients, spec.k
    sh, hyper = spec.shared, spec.hyper
    times = np.array(spec.timepoints, dtype=float)
    z_a, z_b, z_c = bias_terms(hyper)

    x = rng.standard_normal((n, k))
    m_a = expit(z_a + x @ sh.b_a)
    m_b = expit(z_b + x @ sh.b_b)
    m_c = np.exp(z_c + x @ sh.b_c)
    s_a = 1.0 / sh.phi_a - 1.0
    s_b = 1.0 / sh.phi_b - 1.0
    a = rng.beta(1.0 + s_a * m_a, 1.0 + s_a * (1.0 - m_a))
    b = rng.beta(1.0 + s_b * m_b, 1.0 + s_b * (1.0 - m_b))
    alpha_c = 1.0 / sh.phi_c
    c = rng.gamma(alpha_c, m_c / (alpha_c - 1.0))

    f = (1.0 - a[:, None]) * (1.0 - b[:, None] * np.exp(-times[None, :] / c[:, None]))
    y = _draw_mixture(f, sh.theta, sh.p, sh.phi_m, rng)

    n_t = len(times)
    return Dataset(
        x=x,
        s=np.ones(n),
        obs_patient=np.repeat(np.arange(n), n_t),
        obs_t=np.tile(times, n),
        obs_y=y.reshape(-1),
    )


def contaminate(dataset: Dataset, m: int, rng: np.random.Generator) -> Dataset:
    """Append m noise patients whose every observed value is uniform(0, 1);
    covariates stay standard normal, observation months follow the existing
    per-patient grid (the study months)."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return dataset
    times = np.unique(dataset.obs_t)
    n, k = dataset.n, dataset.k
    n_t = len(times)
    x_noise = rng.standard_normal((m, k))
    y_noise = rng.uniform(size=(m, n_t))
    return Dataset(
        x=np.vstack([dataset.x, x_noise]),
        s=np.concatenate([dataset.s, np.ones(m)]),
        obs_patient=np.concatenate([dataset.obs_patient, np.repeat(np.arange(n, n + m), n_t)]),
        obs_t=np.concatenate([dataset.obs_t, np.tile(times, m)]),
        obs_y=np.concatenate([dataset.obs_y, y_noise.reshape(-1)]),
    )


def shared_truth_values(shared: SharedParams) -> dict[str, float]:
    """Flat name -> value map matching the sampler's parameter naming."""
    out: dict[str, float] = {}
    k = shared.k
    for tag in ("b_a", "b_b", "b_c"):
        vec = getattr(shared, tag)
        if k > 1:
            out.update({f"{tag}[{j}]": float(vec[j]) for j in range(k)})
        else:
            out[tag] = float(vec[0])
    for name in ("phi_a", "phi_b", "phi_c", "theta", "p", "phi_m"):
        out[name] = float(getattr(shared, name))
    return out


def _default_fitter(config: SamplerConfig):
    def fitter(dataset: Dataset, hyper: Hyperparameters, seed: int) -> PosteriorSamples:
        return fit_model(dataset, hyper, replace(config, seed=seed))
    return fitter


def _posterior_medians(samples: PosteriorSamples, truth: dict[str, float]) -> dict[str, float]:
    return {name: float(np.median(samples.pooled(name)))
            for name in truth if name in samples.draws}


def recovery_experiment(shared: SharedParams, hyper: Hyperparameters, n_values,
                        replications: int = 5, config: SamplerConfig | None = None,
                        base_seed: int = 0, fitter=None) -> pd.DataFrame:
    """Absolute error of posterior medians vs truth, per parameter, per N,
    per replication.  Columns: parameter, n, replication, abs_error,
    r_hat_max, converged."""
    config = config or SamplerConfig()
    fitter = fitter or _default_fitter(config)
    truth = shared_truth_values(shared)
    rows = []
    for n in n_values:
        for rep in range(replications):
            seed = base_seed + 104729 * int(n) + rep
            spec = SimulationSpec(shared=shared, hyper=hyper, n_patients=int(n),
                                  k=shared.k, seed=seed)
            samples = fitter(simulate_dataset(spec), hyper, seed)
            r_hat = max_gelman_rubin(samples) if samples.n_chains >= 2 else float("nan")
            medians = _posterior_medians(samples, truth)
            for name, value in medians.items():
                rows.append({
                    "parameter": name, "n": int(n), "replication": rep,
                    "abs_error": abs(value - truth[name]),
                    "r_hat_max": r_hat,
                    "converged": bool(r_hat < R_HAT_THRESHOLD) if np.isfinite(r_hat) else False,
                })
    return pd.DataFrame(rows)


def mae_table(results: pd.DataFrame) -> pd.DataFrame:
    """Mean absolute error per (parameter, n) over replications."""
    return (results.groupby(["parameter", "n"], as_index=False)
            .agg(mae=("abs_error", "mean"), r_hat_max=("r_hat_max", "max")))


def noise_experiment(shared: SharedParams, hyper: Hyperparameters, m_values,
                     n_base: int = 5000, config: SamplerConfig | None = None,
                     base_seed: int = 0, fitter=None) -> pd.DataFrame:
    """Signed error of posterior medians vs truth as contamination grows.

    One dataset per M.  The 25th/75th percentile band is taken over the
    pooled posterior draws shifted by the truth, so it always contains the
    median error.  Columns: parameter, m, error, error_q25, error_q75,
    r_hat_max, converged.
    """
    config = config or SamplerConfig()
    fitter = fitter or _default_fitter(config)
    truth = shared_truth_values(shared)
    base_spec = SimulationSpec(shared=shared, hyper=hyper, n_patients=n_base,
                               k=shared.k, seed=base_seed)
    base = simulate_dataset(base_spec)
    rows = []
    for m in m_values:
        rng = np.random.default_rng(base_seed + 7919 * (int(m) + 1))
        dataset = contaminate(base, int(m), rng)
        samples = fitter(dataset, hyper, base_seed + int(m))
        r_hat = max_gelman_rubin(samples) if samples.n_chains >= 2 else float("nan")
        for name in truth:
            if name not in samples.draws:
                continue
            pooled = samples.pooled(name)
            rows.append({
                "parameter": name, "m": int(m),
                "error": float(np.median(pooled)) - truth[name],
                "error_q25": float(np.quantile(pooled, 0.25)) - truth[name],
                "error_q75": float(np.quantile(pooled, 0.75)) - truth[name],
                "r_hat_max": r_hat,
                "converged": bool(r_hat < R_HAT_THRESHOLD) if np.isfinite(r_hat) else False,
            })
    return pd.DataFrame(rows)
