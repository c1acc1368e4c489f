"""HTTP facade serving posterior-predictive recovery-curve quantiles.

Read-only over an immutable loaded posterior; identical requests return
identical bodies (the per-request random stream is derived from the fit id
and the request content).
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, model_validator

from .artifact import FitArtifact
from .data import AGE_EDGES, INIT_EDGES, encode_class
from .fitting import posterior_predictive_curves

__all__ = ["PredictionRequest", "create_app", "class_catalog"]

DEFAULT_QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


class PredictionRequest(BaseModel):
    age: float | None = Field(default=None, gt=0)
    age_bin: int | None = Field(default=None, ge=0, le=2)
    init_bin: int | None = Field(default=None, ge=0, le=3)
    covariates: list[float] | None = None
    s: float = Field(gt=0.0, le=1.0)
    times: list[float]
    quantiles: list[float] = Field(default_factory=lambda: list(DEFAULT_QUANTILES))
    observation_noise: bool = False
    draws: int | None = Field(default=None, ge=1, le=5000)
    include_draws: int | None = Field(default=None, ge=1, le=200)

    @model_validator(mode="after")
    def _check(self):
        if not self.times:
            raise ValueError("times must be nonempty")
        if any(t < 0 for t in self.times):
            raise ValueError("times must be >= 0")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly ascending")
        if any(not 0 < q < 1 for q in self.quantiles):
            raise ValueError("quantiles must lie in (0, 1)")
        if sorted(self.quantiles) != self.quantiles:
            raise ValueError("quantiles must be ascending")
        return self


def class_catalog() -> list[dict]:
    """The 12 (age bin x init bin) classes with their edges."""
    age_ranges = [[0.0, AGE_EDGES[0]], [AGE_EDGES[0], AGE_EDGES[1]], [AGE_EDGES[1], None]]
    init_edges = (0.0,) + INIT_EDGES + (1.0,)
    init_ranges = [[init_edges[j], init_edges[j + 1]] for j in range(4)]
    return [
        {"age_bin": a, "init_bin": i, "age_range": age_ranges[a], "init_range": init_ranges[i]}
        for a in range(3) for i in range(4)
    ]


def _request_rng(fit_id: str, req: PredictionRequest) -> np.random.Generator:
    digest = hashlib.sha256((fit_id + req.model_dump_json()).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def _covariates_for(artifact: FitArtifact, req: PredictionRequest) -> tuple[np.ndarray, dict | None]:
    if req.covariates is not None:
        if len(req.covariates) != artifact.k:
            raise HTTPException(400, detail={"covariates": f"expected length {artifact.k}"})
        return np.asarray(req.covariates, dtype=float), None
    if artifact.feature_spec is None:
        raise HTTPException(400, detail={
            "covariates": "this posterior was not fit on binned features; pass explicit covariates"})
    if req.age_bin is not None:
        age_bin = req.age_bin
    elif req.age is not None:
        age_bin = 0 if req.age < AGE_EDGES[0] else (1 if req.age < AGE_EDGES[1] else 2)
    else:
        raise HTTPException(400, detail={"age": "provide age or age_bin"})
    if req.init_bin is not None:
        init_bin = req.init_bin
    else:
        init_bin = sum(req.s >= e for e in INIT_EDGES)
    x = encode_class(age_bin, init_bin, artifact.feature_spec)
    return x, {"age_bin": age_bin, "init_bin": init_bin}


def create_app(artifact: FitArtifact | None = None) -> FastAPI:
    app = FastAPI(title="recocurve")
    app.state.artifact = artifact

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        fields = {".".join(str(p) for p in e["loc"][1:]) or "body": e["msg"] for e in exc.errors()}
        return JSONResponse(status_code=400, content={"error": "invalid request", "fields": fields})

    @app.get("/health")
    def health():
        art = app.state.artifact
        return {"status": "ok", "fit_id": art.fit_id if art else None}

    @app.get("/classes")
    def classes():
        art = app.state.artifact
        return {"classes": class_catalog(), "fit_id": art.fit_id if art else None}

    @app.post("/predict")
    def predict(req: PredictionRequest):
        art: FitArtifact | None = app.state.artifact
        if art is None:
            raise HTTPException(409, detail="no posterior loaded")
        x, cls = _covariates_for(art, req)
        rng = _request_rng(art.fit_id, req)
        times = np.asarray(req.times, dtype=float)
        curves = posterior_predictive_curves(
            art.samples, art.hyper, x, req.s, times, rng,
            n_draws=req.draws, observation_noise=req.observation_noise)
        quantiles = {str(q): [float(v) for v in np.quantile(curves, q, axis=0)]
                     for q in req.quantiles}
        body = {
            "fit_id": art.fit_id,
            "max_r_hat": art.max_r_hat,
            "times": [float(t) for t in times],
            "quantiles": quantiles,
            "class": cls,
            "s": req.s,
        }
        if req.include_draws:
            sub = curves[:req.include_draws]
            body["draw_subsample"] = [[float(v) for v in row] for row in sub]
        return body

    return app


def load_and_serve(posterior_path, port: int = 8000):  # pragma: no cover - thin wrapper
    import uvicorn

    from .artifact import load_fit

    app = create_app(load_fit(posterior_path))
    uvicorn.run(app, host="127.0.0.1", port=port)
