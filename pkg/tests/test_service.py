"""HTTP facade over a loaded posterior."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from helpers import CLINICAL_HYPER, make_clinical_records
from recocurve.artifact import fit_id_for, load_fit, save_fit
from recocurve.data import FeatureSpec, dataset_from_records, filter_patients
from recocurve.fitting import fit_model
from recocurve.sampler import SamplerConfig, max_gelman_rubin
from recocurve.service import PredictionRequest, class_catalog, create_app


@pytest.fixture(scope="module")
def artifact(tmp_path_factory):
    records, _ = make_clinical_records(60, seed=21)
    kept = filter_patients(records).kept
    spec = FeatureSpec().fit(kept)
    dataset, _ = dataset_from_records(kept, spec)
    config = SamplerConfig(n_chains=2, n_warmup=300, n_keep=300, seed=0)
    samples = fit_model(dataset, CLINICAL_HYPER, config)
    fid = fit_id_for(dataset, CLINICAL_HYPER, config.seed)
    out = tmp_path_factory.mktemp("fit")
    save_fit(out, samples, CLINICAL_HYPER, "clinical", dataset.k, fid, spec)
    return load_fit(out)


@pytest.fixture(scope="module")
def client(artifact):
    return TestClient(create_app(artifact))


BASE_REQUEST = {
    "age": 58,
    "s": 0.8,
    "times": [0, 1, 2, 4, 8, 12, 24, 48],
}


class TestClassCatalog:
    def test_twelve_classes_with_edges(self):
        catalog = class_catalog()
        assert len(catalog) == 12
        assert {(c["age_bin"], c["init_bin"]) for c in catalog} == \
            {(a, i) for a in range(3) for i in range(4)}
        by_bin = {(c["age_bin"], c["init_bin"]): c for c in catalog}
        assert by_bin[(0, 0)]["age_range"] == [0.0, 55.0]
        assert by_bin[(1, 0)]["age_range"] == [55.0, 65.0]
        assert by_bin[(2, 0)]["age_range"][1] is None
        assert by_bin[(0, 1)]["init_range"] == [0.41, 0.60]
        assert by_bin[(0, 3)]["init_range"] == [0.80, 1.0]


class TestEndpoints:
    def test_health(self, client, artifact):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["fit_id"] == artifact.fit_id

    def test_classes(self, client):
        body = client.get("/classes").json()
        assert len(body["classes"]) == 12

    def test_predict_envelope_and_anchor(self, client):
        resp = client.post("/predict", json=BASE_REQUEST)
        assert resp.status_code == 200
        body = resp.json()
        s = BASE_REQUEST["s"]
        for q, values in body["quantiles"].items():
            assert len(values) == len(BASE_REQUEST["times"])
            assert all(0.0 <= v <= s + 1e-9 for v in values)
            assert values[0] == pytest.approx(s)  # f(0) = S exactly
        # Monotone in q at every time, monotone in t (t > 0) for the median.
        qs = sorted(body["quantiles"], key=float)
        arr = np.array([body["quantiles"][q] for q in qs])
        assert np.all(np.diff(arr, axis=0) >= -1e-9)
        median = body["quantiles"]["0.5"]
        assert np.all(np.diff(median[1:]) >= -1e-9)
        assert body["fit_id"] and body["class"] == {"age_bin": 1, "init_bin": 3}

    def test_deterministic_responses(self, client):
        a = client.post("/predict", json=BASE_REQUEST).json()
        b = client.post("/predict", json=BASE_REQUEST).json()
        assert a == b

    def test_explicit_bins_and_quantiles(self, client):
        req = {"age_bin": 2, "init_bin": 0, "s": 0.4, "times": [1, 6, 12],
               "quantiles": [0.25, 0.5, 0.75]}
        body = client.post("/predict", json=req).json()
        assert set(body["quantiles"]) == {"0.25", "0.5", "0.75"}
        assert body["class"] == {"age_bin": 2, "init_bin": 0}

    def test_raw_covariates(self, client, artifact):
        req = {"covariates": [0.0] * artifact.k, "s": 0.9, "times": [1, 12]}
        assert client.post("/predict", json=req).status_code == 200
        bad = {"covariates": [0.0] * (artifact.k + 1), "s": 0.9, "times": [1, 12]}
        assert client.post("/predict", json=bad).status_code == 400

    def test_observation_noise_and_draws(self, client):
        req = dict(BASE_REQUEST, observation_noise=True, draws=100, include_draws=20)
        body = client.post("/predict", json=req).json()
        sub = np.array(body["draw_subsample"])
        assert sub.shape == (20, len(BASE_REQUEST["times"]))
        assert np.all((sub >= 0.0) & (sub <= 1.0))

    @pytest.mark.parametrize("patch", [
        {"times": []},
        {"times": [4, 2, 1]},
        {"times": [-1, 2]},
        {"s": 0.0},
        {"s": 1.5},
        {"quantiles": [0.5, 0.1]},
        {"quantiles": [0.0, 0.5]},
    ])
    def test_invalid_requests_400(self, client, patch):
        req = dict(BASE_REQUEST)
        req.update(patch)
        resp = client.post("/predict", json=req)
        assert resp.status_code == 400
        assert "fields" in resp.json() or "detail" in resp.json()

    def test_missing_age_400(self, client):
        resp = client.post("/predict", json={"s": 0.8, "times": [1, 2]})
        assert resp.status_code == 400

    def test_no_posterior_409(self):
        bare = TestClient(create_app(None))
        assert bare.post("/predict", json=BASE_REQUEST).status_code == 409
        assert bare.get("/health").json()["fit_id"] is None


class TestArtifact:
    def test_fit_id_stable_and_sensitive(self, artifact):
        records, _ = make_clinical_records(60, seed=21)
        kept = filter_patients(records).kept
        spec = FeatureSpec().fit(kept)
        dataset, _ = dataset_from_records(kept, spec)
        assert fit_id_for(dataset, CLINICAL_HYPER, 0) == artifact.fit_id
        assert fit_id_for(dataset, CLINICAL_HYPER, 1) != artifact.fit_id

    def test_roundtrip_metadata(self, artifact):
        assert artifact.kind == "clinical"
        assert artifact.k == 6
        assert artifact.feature_spec is not None
        assert np.isfinite(artifact.max_r_hat)
        assert artifact.max_r_hat == pytest.approx(max_gelman_rubin(artifact.samples),
                                                   rel=1e-9)


class TestRequestModel:
    def test_defaults(self):
        req = PredictionRequest(age=50, s=0.5, times=[1.0, 2.0])
        assert req.quantiles == [0.1, 0.25, 0.5, 0.75, 0.9]
        assert req.observation_noise is False
