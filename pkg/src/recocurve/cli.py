"""Command-line entry points: simulate, fit, cv, predict, serve.

All commands are deterministic given --seed.  Bad input exits 2 with one
machine-parsable JSON error line on stderr; a fit whose maximum R-hat
reaches 1.2 exits 3 after still writing its outputs.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click
import numpy as np

from .artifact import fit_id_for, load_fit, save_fit
from .data import (
    FeatureSpec,
    dataset_from_records,
    filter_patients,
    load_patients,
    write_filter_report,
)
from .evaluate import (
    baseline_average_scaled,
    baseline_average_value,
    baseline_median_by_class,
    baseline_timewise_regression,
    evaluate_model,
    fit_average_shape,
    kfold_split,
    model_predictor_factory,
)
from .fitting import fit_model, posterior_predictive_curves
from .model import Hyperparameters, load_hyperparameters
from .sampler import SamplerConfig
from .simulate import (
    R_HAT_THRESHOLD,
    SimulationSpec,
    contaminate,
    default_hyperparameters,
    default_true_shared,
    load_sim_dataset,
    save_sim_dataset,
    simulate_dataset,
)

EXIT_BAD_INPUT = 2
EXIT_CONVERGENCE_WARNING = 3


def _fail(message: str) -> None:
    sys.stderr.write(json.dumps({"error": message}) + "\n")
    sys.exit(EXIT_BAD_INPUT)


def _sampler_config(chains, warmup, keep, seed) -> SamplerConfig:
    return SamplerConfig(n_chains=chains, n_warmup=warmup, n_keep=keep, seed=seed)


@click.group()
def main():
    """Recovery-curve modeling toolkit."""


@main.command()
@click.option("--n", type=int, required=True, help="number of patients")
@click.option("--m", type=int, default=0, help="contaminating noise patients")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def simulate(n, m, seed, out):
    """Simulate a dataset from the reference truth."""
    try:
        spec = SimulationSpec(shared=default_true_shared(), hyper=default_hyperparameters(),
                              n_patients=n, seed=seed)
        dataset = simulate_dataset(spec)
        if m:
            dataset = contaminate(dataset, m, np.random.default_rng(seed + 1))
        save_sim_dataset(dataset, out)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {dataset.n} patients, {dataset.n_obs} observations to {out}")


def _load_any_dataset(data_dir: Path, hyper: Hyperparameters | None):
    """Clinical directory (patients.csv) or simulated one (covariates.csv)."""
    if (data_dir / "patients.csv").exists():
        records = load_patients(data_dir)
        result = filter_patients(records)
        spec = FeatureSpec().fit(result.kept)
        dataset, _ = dataset_from_records(result.kept, spec)
        if hyper is None:
            mu_a, mu_b, mu_c = fit_average_shape(result.kept)
            eps = 1e-3
            hyper = Hyperparameters(mu_a=float(np.clip(mu_a, eps, 1 - eps)),
                                    mu_b=float(np.clip(mu_b, eps, 1 - eps)),
                                    mu_c=max(mu_c, eps))
        return dataset, hyper, "clinical", spec, result
    if (data_dir / "covariates.csv").exists():
        dataset = load_sim_dataset(data_dir)
        return dataset, hyper or default_hyperparameters(), "simulation", None, None
    raise click.ClickException(f"{data_dir}: neither patients.csv nor covariates.csv found")


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="hyperparameter key = value file")
@click.option("--seed", type=int, default=0)
@click.option("--chains", type=int, default=4)
@click.option("--warmup", type=int, default=2500)
@click.option("--keep", type=int, default=2500)
@click.option("--out", type=click.Path(), required=True)
def fit(data_dir, config_path, seed, chains, warmup, keep, out):
    """Fit the hierarchical model and persist the posterior."""
    try:
        hyper = load_hyperparameters(config_path) if config_path else None
        dataset, hyper, kind, feature_spec, filt = _load_any_dataset(Path(data_dir), hyper)
        config = _sampler_config(chains, warmup, keep, seed)
        samples = fit_model(dataset, hyper, config)
        fid = fit_id_for(dataset, hyper, seed)
        summary = save_fit(out, samples, hyper, kind, dataset.k, fid, feature_spec)
        if filt is not None:
            write_filter_report(filt, Path(out) / "filter_report.csv")
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"fit {fid}: max R-hat {summary['max_r_hat']:.4f}")
    if not summary["max_r_hat"] < R_HAT_THRESHOLD:
        click.echo(f"warning: max R-hat {summary['max_r_hat']:.4f} >= {R_HAT_THRESHOLD}", err=True)
        sys.exit(EXIT_CONVERGENCE_WARNING)


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False), required=True,
              help="clinical-format dataset directory")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--folds", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--chains", type=int, default=2)
@click.option("--warmup", type=int, default=500)
@click.option("--keep", type=int, default=500)
@click.option("--out", type=click.Path(), required=True, help="loss table CSV")
def cv(data_dir, config_path, folds, seed, chains, warmup, keep, out):
    """Cross-validate the model against the baselines."""
    import pandas as pd

    try:
        records = load_patients(Path(data_dir))
        kept = filter_patients(records).kept
        fold_ids = kfold_split([r.id for r in kept], k=folds, seed=seed)
        hyper = load_hyperparameters(config_path) if config_path else None
        if hyper is None:
            mu_a, mu_b, mu_c = fit_average_shape(kept)
            eps = 1e-3
            hyper = Hyperparameters(mu_a=float(np.clip(mu_a, eps, 1 - eps)),
                                    mu_b=float(np.clip(mu_b, eps, 1 - eps)), mu_c=max(mu_c, eps))
        config = _sampler_config(chains, warmup, keep, seed)
        predictors = {
            "model": model_predictor_factory(hyper, config),
            "average_value": baseline_average_value,
            "average_scaled_value": baseline_average_scaled,
            "regression": lambda train: baseline_timewise_regression(train, scaled=False),
            "scaled_regression": lambda train: baseline_timewise_regression(train, scaled=True),
        }
        rows = []
        for name, factory in predictors.items():
            curve = evaluate_model(factory, fold_ids, kept)
            for month, loss, sem in zip(curve.months, curve.mae, curve.sem):
                rows.append({"model": name, "time": month, "loss": loss, "stderr": sem})
        # In-sample by design, labeled as such.
        median_pred = baseline_median_by_class(kept)
        errs: dict[int, list[float]] = {}
        for r in kept:
            months = sorted(r.observations)
            preds = median_pred(r, months)
            for mth, pred in zip(months, preds):
                errs.setdefault(mth, []).append(abs(pred - r.observations[mth]))
        for mth in sorted(errs):
            e = np.array(errs[mth])
            rows.append({"model": "median_in_sample", "time": mth, "loss": float(e.mean()),
                         "stderr": float(e.std(ddof=1) / np.sqrt(len(e))) if len(e) > 1 else 0.0})
        pd.DataFrame(rows).to_csv(out, index=False)
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"wrote loss table to {out}")


@main.command()
@click.option("--posterior", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--age", type=float, default=None)
@click.option("--s", type=float, required=True)
@click.option("--times", default="0,1,2,4,8,12,18,24,30,36,42,48")
@click.option("--quantiles", default="0.1,0.25,0.5,0.75,0.9")
@click.option("--seed", type=int, default=0)
def predict(posterior, age, s, times, quantiles, seed):
    """Print posterior-predictive curve quantiles as JSON."""
    try:
        art = load_fit(posterior)
        t = np.array([float(v) for v in times.split(",")])
        qs = [float(v) for v in quantiles.split(",")]
        if art.feature_spec is not None:
            if age is None:
                raise ValueError("--age is required for feature-based posteriors")
            from .data import encode_class

            age_bin = 0 if age < 55 else (1 if age < 65 else 2)
            init_bin = sum(s >= e for e in (0.41, 0.60, 0.80))
            x = encode_class(age_bin, init_bin, art.feature_spec)
        else:
            x = np.zeros(art.k)
        rng = np.random.default_rng(seed)
        curves = posterior_predictive_curves(art.samples, art.hyper, x, s, t, rng)
        out = {
            "fit_id": art.fit_id,
            "times": list(map(float, t)),
            "quantiles": {str(q): [float(v) for v in np.quantile(curves, q, axis=0)] for q in qs},
        }
    except (ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(out))


@main.command()
@click.option("--posterior", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--port", type=int, default=8000)
def serve(posterior, port):
    """Serve the prediction API over HTTP."""
    from .service import load_and_serve

    load_and_serve(posterior, port=port)


if __name__ == "__main__":
    main()
