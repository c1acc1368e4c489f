#!/usr/bin/env python3
"""Build a small demo posterior and record HTTP responses from the
prediction service as JSON fixtures for the frontend snapshot tests."""

import argparse
import json
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from recocurve.artifact import fit_id_for, save_fit, load_fit
from recocurve.curves import RecoveryShapeParams, eval_shape
from recocurve.data import (
    FeatureSpec,
    PatientRecord,
    STUDY_MONTHS,
    dataset_from_records,
    filter_patients,
)
from recocurve.dists import ModeSpreadBeta, ModeSpreadGamma, sample_beta, sample_gamma
from recocurve.fitting import fit_model
from recocurve.sampler import SamplerConfig, max_gelman_rubin
from recocurve.service import create_app

TIMES = [0.0, 1.0, 2.0, 4.0, 8.0, 12.0, 18.0, 24.0, 30.0, 36.0, 42.0, 48.0]
# Representative pre-treatment level inside each initial-level bin.
BIN_LEVELS = (0.2, 0.5, 0.7, 0.9)


def demo_records(n: int, seed: int) -> list[PatientRecord]:
    """Synthetic clinical cohort whose trajectories follow the model."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        age = float(rng.uniform(40.0, 80.0))
        pre = float(rng.uniform(0.35, 0.99))
        # Older patients recover less and slower; high starters recover more.
        m_a = float(np.clip(0.25 + 0.004 * (age - 60) - 0.1 * (pre - 0.6), 0.05, 0.9))
        a = float(sample_beta(ModeSpreadBeta(m_a, 0.05), rng))
        b = float(sample_beta(ModeSpreadBeta(0.6, 0.05), rng))
        c = float(sample_gamma(ModeSpreadGamma(4.0, 0.05), rng))
        shape = RecoveryShapeParams(a=a, b=b, c=c)
        obs = {}
        for month in STUDY_MONTHS:
            f = float(eval_shape(shape, float(month)))
            m_f = float(np.clip(f, 1e-3, 1 - 1e-3))
            noisy = float(sample_beta(ModeSpreadBeta(m_f, 0.02), rng))
            obs[int(month)] = round(noisy * pre, 6)
        records.append(PatientRecord(id=f"demo{i:03d}", age=age,
                                     pre_treatment=pre, observations=obs))
    return records


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=150)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--chains", type=int, default=2)
    parser.add_argument("--warmup", type=int, default=600)
    parser.add_argument("--keep", type=int, default=600)
    parser.add_argument("--fit-dir", type=Path, default=Path("/tmp/recocurve_demo_fit"))
    parser.add_argument("--out", type=Path,
                        default=Path(__file__).resolve().parents[1]
                        / "frontend" / "tests" / "fixtures")
    args = parser.parse_args()

    kept = filter_patients(demo_records(args.n, args.seed)).kept
    spec = FeatureSpec().fit(kept)
    dataset, _ = dataset_from_records(kept, spec)
    config = SamplerConfig(n_chains=args.chains, n_warmup=args.warmup,
                           n_keep=args.keep, seed=args.seed)
    hyper = load_hyper(kept)
    samples = fit_model(dataset, hyper, config)
    r_hat = max_gelman_rubin(samples)
    print(f"demo fit: {dataset.n} patients, max r_hat = {r_hat:.3f}")
    fit_id = fit_id_for(dataset, hyper, args.seed)
    save_fit(args.fit_dir, samples, hyper, "clinical",
             dataset.k, fit_id, feature_spec=spec)

    client = TestClient(create_app(load_fit(args.fit_dir)))
    args.out.mkdir(parents=True, exist_ok=True)

    def record(name: str, method: str, url: str, body=None):
        resp = (client.get(url) if method == "GET"
                else client.post(url, json=body))
        assert resp.status_code == 200, (name, resp.status_code, resp.text)
        payload = {"request": {"method": method, "url": url, "body": body},
                   "response": resp.json()}
        (args.out / f"{name}.json").write_text(json.dumps(payload, indent=1))
        print("recorded", name)

    record("health", "GET", "/health")
    record("classes", "GET", "/classes")
    for a in range(3):
        for i in range(4):
            record(f"predict_class_{a}_{i}", "POST", "/predict",
                   {"age_bin": a, "init_bin": i, "s": BIN_LEVELS[i],
                    "times": TIMES})
    record("predict_draws", "POST", "/predict",
           {"age": 62.0, "s": 0.8, "times": TIMES, "include_draws": 20})
    record("predict_compare_a", "POST", "/predict",
           {"age": 50.0, "s": 0.9, "times": TIMES})
    record("predict_compare_b", "POST", "/predict",
           {"age": 70.0, "s": 0.5, "times": TIMES})


def load_hyper(kept):
    from recocurve.evaluate import fit_average_shape
    from recocurve.model import Hyperparameters

    mu_a, mu_b, mu_c = fit_average_shape(kept)
    eps = 1e-3
    return Hyperparameters(mu_a=float(np.clip(mu_a, eps, 1 - eps)),
                           mu_b=float(np.clip(mu_b, eps, 1 - eps)),
                           mu_c=max(mu_c, eps))


if __name__ == "__main__":
    main()
