"""Shared fixtures: synthetic datasets and short sampler configurations."""

from __future__ import annotations

import pytest

from helpers import make_clinical_records
from recocurve.sampler import SamplerConfig
from recocurve.simulate import (
    SimulationSpec,
    default_hyperparameters,
    default_true_shared,
    simulate_dataset,
)


@pytest.fixture(scope="session")
def tiny_sim_dataset():
    spec = SimulationSpec(shared=default_true_shared(), hyper=default_hyperparameters(),
                          n_patients=40, seed=11)
    return simulate_dataset(spec)


@pytest.fixture(scope="session")
def quick_config():
    return SamplerConfig(n_chains=2, n_warmup=300, n_keep=300, seed=0)


@pytest.fixture(scope="session")
def clinical_records():
    records, truth = make_clinical_records(120, seed=5)
    return records, truth
