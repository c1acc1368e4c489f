"""Cross-validation harness, baseline models, grid search, and tests of
group differences.

Predictors follow one shape: a factory takes the training records and
returns predict(record, months) -> array of *absolute* predicted values.
The loss is mean absolute prediction error per timepoint, pooled over test
patients, with a standard-error-of-the-mean estimate for error bars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from scipy.optimize import least_squares
from scipy.special import expit, logit, ndtr

from .data import (
    FeatureSpec,
    PatientRecord,
    bin_age,
    bin_init,
    dataset_from_records,
    encode_features,
    scaled_observations,
)
from .curves import fit_shape
from .fitting import fit_model, posterior_predictive_curves
from .model import Hyperparameters
from .sampler import SamplerConfig

__all__ = [
    "EvaluationError",
    "LossCurve",
    "kfold_split",
    "evaluate_model",
    "baseline_average_value",
    "baseline_average_scaled",
    "baseline_timewise_regression",
    "baseline_median_by_class",
    "model_predictor_factory",
    "one_sided_ztest",
    "grid_search",
    "fit_average_shape",
]

_RIDGE = 1e-6
_COEF_BOUND = 20.0


class EvaluationError(RuntimeError):
    pass


@dataclass
class LossCurve:
    """Per-timepoint mean absolute error with SEM error bars."""

    months: list[int]
    mae: np.ndarray
    sem: np.ndarray
    counts: np.ndarray

    def pooled_mean(self) -> float:
        return float(np.sum(self.mae * self.counts) / np.sum(self.counts))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time": self.months, "loss": self.mae,
                             "stderr": self.sem, "n": self.counts})


def kfold_split(ids, k: int = 5, seed: int = 0) -> list[list]:
    """Disjoint near-equal folds of whole patients; deterministic per seed."""
    ids = list(ids)
    if k > len(ids):
        raise EvaluationError(f"k={k} exceeds {len(ids)} patients")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    folds: list[list] = [[] for _ in range(k)]
    for pos, idx in enumerate(order):
        folds[pos % k].append(ids[idx])
    return folds


def evaluate_model(predictor_factory, folds: list[list[str]],
                   records: list[PatientRecord]) -> LossCurve:
    """Train on the complement of each fold, predict entire held-out time
    series, pool absolute errors per timepoint."""
    by_id = {r.id: r for r in records}
    errors: dict[int, list[float]] = {}
    for fold_idx, fold in enumerate(folds):
        test_ids = set(fold)
        train = [r for r in records if r.id not in test_ids]
        try:
            predict = predictor_factory(train)
        except Exception as exc:
            raise EvaluationError(f"predictor failed on fold {fold_idx}: {exc}") from exc
        for pid in fold:
            record = by_id[pid]
            months = sorted(record.observations)
            if not months:
                continue
            preds = np.asarray(predict(record, months), dtype=float)
            for month, pred in zip(months, preds):
                errors.setdefault(month, []).append(abs(pred - record.observations[month]))
    months = sorted(errors)
    mae = np.array([np.mean(errors[m]) for m in months])
    sem = np.array([np.std(errors[m], ddof=1) / math.sqrt(len(errors[m]))
                    if len(errors[m]) > 1 else 0.0 for m in months])
    counts = np.array([len(errors[m]) for m in months])
    return LossCurve(months=months, mae=mae, sem=sem, counts=counts)


def _month_table(records, scaled: bool) -> dict[int, list[float]]:
    table: dict[int, list[float]] = {}
    for r in records:
        values = scaled_observations(r)[0] if scaled else r.observations
        for month, v in values.items():
            table.setdefault(month, []).append(v)
    return table


def baseline_average_value(train: list[PatientRecord]):
    """Everyone gets the per-month training mean of absolute values."""
    means = {m: float(np.mean(v)) for m, v in _month_table(train, scaled=False).items()}

    def predict(record, months):
        _require(means, months)
        return np.array([means[m] for m in months])

    return predict


def baseline_average_scaled(train: list[PatientRecord]):
    """Per-month training mean of scaled values, times the patient's own
    pre-treatment level."""
    means = {m: float(np.mean(v)) for m, v in _month_table(train, scaled=True).items()}

    def predict(record, months):
        _require(means, months)
        return record.pre_treatment * np.array([means[m] for m in months])

    return predict


def _require(table, months) -> None:
    missing = [m for m in months if m not in table]
    if missing:
        raise EvaluationError(f"months {missing} absent from training data")


def _fit_logistic_ls(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimize sum (y - logistic(x.b))^2, multi-start bounded least squares
    with a ridge fallback when the design is rank deficient."""
    ridge = math.sqrt(_RIDGE) if np.linalg.matrix_rank(x) < x.shape[1] else 0.0

    def residuals(b):
        r = expit(x @ b) - y
        return np.concatenate([r, ridge * b]) if ridge else r

    starts = [np.zeros(x.shape[1])]
    # Warm start from a linear fit in logit space.
    y_clip = np.clip(y, 1e-3, 1.0 - 1e-3)
    warm, *_ = np.linalg.lstsq(x, logit(y_clip), rcond=None)
    starts.append(np.clip(warm, -_COEF_BOUND, _COEF_BOUND))
    best, best_sse = None, np.inf
    for x0 in starts:
        res = least_squares(residuals, x0, bounds=(-_COEF_BOUND, _COEF_BOUND), method="trf")
        sse = float(np.sum(res.fun**2))
        if sse < best_sse - 1e-12:
            best, best_sse = res.x, sse
    return best


def baseline_timewise_regression(train: list[PatientRecord], scaled: bool = True):
    """Independent per-month logistic-link least-squares regressions on the
    binned features; the scaled variant rescales by the patient's own
    pre-treatment level."""
    spec = FeatureSpec().fit(train)
    coefs: dict[int, np.ndarray] = {}
    rows: dict[int, list[tuple[np.ndarray, float]]] = {}
    for r in train:
        values = scaled_observations(r)[0] if scaled else r.observations
        feats = encode_features(r, spec)
        for month, v in values.items():
            rows.setdefault(month, []).append((feats, v))
    for month, data in rows.items():
        x = np.array([d[0] for d in data])
        y = np.array([d[1] for d in data])
        coefs[month] = _fit_logistic_ls(x, y)

    def predict(record, months):
        _require(coefs, months)
        feats = encode_features(record, spec)
        out = np.array([float(expit(feats @ coefs[m])) for m in months])
        return record.pre_treatment * out if scaled else out

    return predict


def baseline_median_by_class(all_records: list[PatientRecord]):
    """Per-class per-month median scaled value over the entire dataset,
    times the patient's own pre-treatment level.  In-sample by design; an
    empty class cell falls back to the global per-month median."""
    classes: dict[tuple[int, int], dict[int, list[float]]] = {}
    global_table = _month_table(all_records, scaled=True)
    for r in all_records:
        key = (bin_age(r.age), bin_init(r.pre_treatment))
        cell = classes.setdefault(key, {})
        for month, v in scaled_observations(r)[0].items():
            cell.setdefault(month, []).append(v)
    medians = {key: {m: float(np.median(v)) for m, v in cell.items()}
               for key, cell in classes.items()}
    global_medians = {m: float(np.median(v)) for m, v in global_table.items()}

    def predict(record, months):
        _require(global_medians, months)
        key = (bin_age(record.age), bin_init(record.pre_treatment))
        cell = medians.get(key, {})
        vals = np.array([cell.get(m, global_medians[m]) for m in months])
        return record.pre_treatment * vals

    return predict


def fit_average_shape(train: list[PatientRecord]) -> tuple[float, float, float]:
    """Average-shape anchors (mu_a, mu_b, mu_c): fit the parametric form to
    the per-month means of scaled training values."""
    if not train:
        raise EvaluationError("empty training fold")
    table = _month_table(train, scaled=True)
    points = [(float(m), float(np.mean(v))) for m, v in sorted(table.items())]
    fit = fit_shape(points, constrain_asymptote=True)
    return fit.a, fit.b, fit.c


def model_predictor_factory(hyper: Hyperparameters, config: SamplerConfig,
                            refit_mu: bool = True, n_draws: int = 400):
    """Full-model predictor: fit the hierarchy on the training fold, predict
    each test patient's curve by the posterior median of f(t), rescaled by
    their pre-treatment level."""

    def factory(train: list[PatientRecord]):
        h = hyper
        if refit_mu:
            mu_a, mu_b, mu_c = fit_average_shape(train)
            eps = 1e-3
            h = replace(hyper, mu_a=float(np.clip(mu_a, eps, 1 - eps)),
                        mu_b=float(np.clip(mu_b, eps, 1 - eps)), mu_c=max(mu_c, eps))
        spec = FeatureSpec().fit(train)
        dataset, _ = dataset_from_records(train, spec)
        samples = fit_model(dataset, h, config)

        def predict(record, months):
            x = encode_features(record, spec)
            rng = np.random.default_rng(config.seed + hash(record.id) % 100003)
            curves = posterior_predictive_curves(samples, h, x, 1.0,
                                                 np.asarray(months, dtype=float), rng,
                                                 n_draws=n_draws)
            return record.pre_treatment * np.median(curves, axis=0)

        return predict

    return factory


def one_sided_ztest(group_a, group_b) -> float:
    """Upper-tail p-value of the unpaired two-sample z test that group_a's
    mean exceeds group_b's."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise EvaluationError("both groups need at least 2 values")
    se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
    if se == 0.0:
        raise EvaluationError("zero pooled variance")
    z = (a.mean() - b.mean()) / se
    return float(1.0 - ndtr(z))


def grid_search(grid: list[Hyperparameters], records: list[PatientRecord],
                folds: list[list[str]], evaluate_cell=None,
                config: SamplerConfig | None = None) -> tuple[Hyperparameters, pd.DataFrame]:
    """Exhaustive CV evaluation of a hyperparameter grid.

    evaluate_cell(hyper, records, folds) -> LossCurve; defaults to the full
    model predictor.  Ties break toward the earliest grid entry.  The table
    has one row per cell per timepoint, degenerate cells included.
    """
    if not grid:
        raise EvaluationError("empty grid")
    if evaluate_cell is None:
        config = config or SamplerConfig()

        def evaluate_cell(hyper, records, folds):
            return evaluate_model(model_predictor_factory(hyper, config), folds, records)

    rows = []
    best_idx, best_loss = 0, np.inf
    for idx, hyper in enumerate(grid):
        curve = evaluate_cell(hyper, records, folds)
        pooled = curve.pooled_mean()
        if pooled < best_loss - 1e-15:
            best_idx, best_loss = idx, pooled
        for month, loss, sem in zip(curve.months, curve.mae, curve.sem):
            rows.append({"cell": idx, "phi_a": hyper.phi_a, "phi_b": hyper.phi_b,
                         "phi_c": hyper.phi_c, "s_a": hyper.s_a, "s_b": hyper.s_b,
                         "s_c": hyper.s_c, "lambda_m": hyper.lambda_m,
                         "time": month, "loss": loss, "stderr": sem,
                         "pooled_loss": pooled})
    return grid[best_idx], pd.DataFrame(rows)


def tied_phi_grid(base: Hyperparameters, phi_values, phi_c: float = 0.8) -> list[Hyperparameters]:
    """Sensitivity sweep: tie phi_a = phi_b over phi_values at fixed phi_c."""
    return [replace(base, phi_a=v, phi_b=v, phi_c=phi_c) for v in phi_values]


def tied_s_grid(base: Hyperparameters, s_values) -> list[Hyperparameters]:
    """Sensitivity sweep: tie s_a = s_b = s_c over s_values."""
    return [replace(base, s_a=v, s_b=v, s_c=v) for v in s_values]
