"""Fit artifacts: posterior draws plus the metadata needed to serve them.

A fit directory holds samples.ndjson (one record per kept draw) and
summary.json (R-hat, acceptance, hyperparameters, feature statistics, fit
id).  The fit id is a digest of the inputs, so clients can detect that a
loaded posterior changed.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import FeatureSpec
from .model import Dataset, Hyperparameters
from .sampler import PosteriorSamples, load_samples, save_samples, write_summary

__all__ = ["FitArtifact", "fit_id_for", "save_fit", "load_fit"]


def fit_id_for(dataset: Dataset, hyper: Hyperparameters, seed: int) -> str:
    h = hashlib.sha256()
    for arr in (dataset.x, dataset.s, dataset.obs_patient, dataset.obs_t, dataset.obs_y):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(json.dumps(dataclasses.asdict(hyper), sort_keys=True).encode())
    h.update(str(seed).encode())
    return h.hexdigest()[:16]


@dataclass
class FitArtifact:
    samples: PosteriorSamples
    hyper: Hyperparameters
    kind: str  # "clinical" or "simulation"
    k: int
    fit_id: str
    max_r_hat: float
    feature_spec: FeatureSpec | None = None


def save_fit(path, samples: PosteriorSamples, hyper: Hyperparameters, kind: str,
             k: int, fit_id: str, feature_spec: FeatureSpec | None = None) -> dict:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    save_samples(samples, root / "samples.ndjson")
    extra = {
        "fit_id": fit_id,
        "kind": kind,
        "k": k,
        "hyper": dataclasses.asdict(hyper),
        "feature_spec": feature_spec.to_dict() if feature_spec is not None else None,
    }
    return write_summary(samples, root / "summary.json", extra=extra)


def load_fit(path) -> FitArtifact:
    root = Path(path)
    summary = json.loads((root / "summary.json").read_text(encoding="utf-8"))
    samples = load_samples(root / "samples.ndjson")
    spec = summary.get("feature_spec")
    return FitArtifact(
        samples=samples,
        hyper=Hyperparameters(**summary["hyper"]),
        kind=summary["kind"],
        k=summary["k"],
        fit_id=summary["fit_id"],
        max_r_hat=summary["max_r_hat"],
        feature_spec=FeatureSpec.from_dict(spec) if spec is not None else None,
    )
