"""Synthetic clinical-format data generated from the model itself."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from recocurve.data import STUDY_MONTHS, FeatureSpec, PatientRecord, encode_features
from recocurve.model import Hyperparameters, SharedParams, bias_terms

# Hyperparameters used to generate the synthetic clinical fixture.
CLINICAL_HYPER = Hyperparameters(mu_a=0.3, mu_b=0.6, mu_c=4.0)


def make_clinical_records(n: int, seed: int = 0,
                          hyper: Hyperparameters = CLINICAL_HYPER):
    """Generate record-format patients from the model itself.

    Ages and pre-treatment levels are drawn to populate all 12 classes; the
    class features drive the modes through fixed coefficient vectors, and the
    observed values are mixture draws times the pre-treatment level.  Returns
    (records, truth) where truth maps patient id -> its true (a, b, c).
    """
    rng = np.random.default_rng(seed)
    ages = rng.uniform(40.0, 80.0, n)
    pres = rng.uniform(0.35, 0.99, n)
    records = [PatientRecord(id=f"p{i:04d}", age=float(ages[i]), pre_treatment=float(pres[i]))
               for i in range(n)]
    spec = FeatureSpec().fit(records)
    x = np.array([encode_features(r, spec) for r in records])

    # Modest class effects on every family; last entry is the bias column.
    b_a = np.array([0.4, 0.2, -0.5, -0.3, -0.2, 0.0])
    b_b = np.array([-0.3, -0.2, 0.4, 0.3, 0.2, 0.0])
    b_c = np.array([0.3, 0.2, -0.2, -0.1, -0.1, 0.0])
    shared = SharedParams(b_a=b_a, b_b=b_b, b_c=b_c, phi_a=0.05, phi_b=0.05,
                          phi_c=0.05, theta=0.05, p=0.3, phi_m=0.02)
    z_a, z_b, z_c = bias_terms(hyper)
    m_a = expit(z_a + x @ shared.b_a)
    m_b = expit(z_b + x @ shared.b_b)
    m_c = np.exp(z_c + x @ shared.b_c)
    s_a = 1.0 / shared.phi_a - 1.0
    s_b = 1.0 / shared.phi_b - 1.0
    a = rng.beta(1.0 + s_a * m_a, 1.0 + s_a * (1.0 - m_a))
    b = rng.beta(1.0 + s_b * m_b, 1.0 + s_b * (1.0 - m_b))
    alpha_c = 1.0 / shared.phi_c
    c = rng.gamma(alpha_c, m_c / (alpha_c - 1.0))

    times = np.array(STUDY_MONTHS, dtype=float)
    truth = {}
    for i, r in enumerate(records):
        f = (1.0 - a[i]) * (1.0 - b[i] * np.exp(-times / c[i]))
        is_bern = rng.uniform(size=len(times)) < shared.theta
        bern = (rng.uniform(size=len(times)) < shared.p).astype(float)
        sm = 1.0 / shared.phi_m - 1.0
        fm = np.clip(f, 1e-6, 1.0 - 1e-6)
        beta_draw = rng.beta(1.0 + sm * fm, 1.0 + sm * (1.0 - fm))
        y_scaled = np.where(is_bern, bern, beta_draw)
        r.observations = {int(m): float(y_scaled[j] * r.pre_treatment)
                          for j, m in enumerate(STUDY_MONTHS)}
        truth[r.id] = {"a": float(a[i]), "b": float(b[i]), "c": float(c[i])}
    return records, truth
