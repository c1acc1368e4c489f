"""Hierarchical recovery-curve model.

Per patient i with covariates x_i, pre-event level s_i and sparse
observations y_i(t):

    a_i ~ beta_{m,phi}(logistic(z_a + b_a . x_i), phi_a)
    b_i ~ beta_{m,phi}(logistic(z_b + b_b . x_i), phi_b)
    c_i ~ gamma_{m,phi}(exp(z_c + b_c . x_i), phi_c)
    y_i(t) ~ theta * bernoulli(p) + (1 - theta) * beta_{m,phi}(f_i(t), phi_m)

with f_i(t) = s_i * g(t; a_i, b_i, c_i).  Bias terms z_* center the prior
curve on the population-average shape (mu_a, mu_b, mu_c): z_a = logit(mu_a),
z_b = logit(mu_b), z_c = log(mu_c).

Note: we use z_c = log(mu_c), the value required for the exp link to center
mode_c at mu_c; an exp(mu_c) bias would break that centering.

Priors: regression weights ~ normal(0, s) with s a *standard deviation*;
spread parameters ~ exponential(lambda) right-truncated at 1; theta, p
uniform on (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.special import expit, logit

from .dists import beta_log_pdf_raw, beta_to_standard, gamma_log_pdf_raw, gamma_to_standard

__all__ = [
    "ModelError",
    "Hyperparameters",
    "SharedParams",
    "PatientParams",
    "Dataset",
    "bias_terms",
    "mode_a",
    "mode_b",
    "mode_c",
    "log_likelihood_obs",
    "truncated_exp_log_pdf",
    "log_prior",
    "log_hierarchy",
    "log_posterior",
    "ModelTransform",
    "load_hyperparameters",
]

# Clamp applied to f before use as a beta mode: a -> 0, b -> 0 can push f to
# s, and s may be 1 exactly.
F_EPS = 1e-6


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparameters:
    """Fixed quantities of the model.

    phi_a/phi_b/phi_c, when set, pin the spread parameters instead of giving
    them truncated-exponential priors (the data-analysis mode where spreads
    are tuned by grid search rather than sampled).
    """

    mu_a: float
    mu_b: float
    mu_c: float
    s_a: float = 1.0
    s_b: float = 1.0
    s_c: float = 1.0
    lambda_a: float = 10.0
    lambda_b: float = 10.0
    lambda_c: float = 10.0
    lambda_m: float = 10.0
    phi_a: float | None = None
    phi_b: float | None = None
    phi_c: float | None = None

    def __post_init__(self) -> None:
        for name in ("mu_a", "mu_b"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 < v < 1.0):
                raise ModelError(f"{name} must be in (0, 1), got {v}")
        for name in ("mu_c", "s_a", "s_b", "s_c", "lambda_a", "lambda_b", "lambda_c", "lambda_m"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ModelError(f"{name} must be > 0, got {v}")
        for name in ("phi_a", "phi_b", "phi_c"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and 0.0 < v < 1.0):
                raise ModelError(f"{name} must be in (0, 1) when fixed, got {v}")

    @property
    def fixed_phis(self) -> bool:
        return self.phi_a is not None


@dataclass
class SharedParams:
    """Population-level parameters."""

    b_a: np.ndarray
    b_b: np.ndarray
    b_c: np.ndarray
    phi_a: float
    phi_b: float
    phi_c: float
    theta: float
    p: float
    phi_m: float

    def __post_init__(self) -> None:
        self.b_a = np.atleast_1d(np.asarray(self.b_a, dtype=float))
        self.b_b = np.atleast_1d(np.asarray(self.b_b, dtype=float))
        self.b_c = np.atleast_1d(np.asarray(self.b_c, dtype=float))
        if not (len(self.b_a) == len(self.b_b) == len(self.b_c)):
            raise ModelError("coefficient vectors must share one length")
        for name in ("phi_a", "phi_b", "phi_c", "theta", "p", "phi_m"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 < v < 1.0):
                raise ModelError(f"{name} must be in (0, 1), got {v}")

    @property
    def k(self) -> int:
        return len(self.b_a)


@dataclass
class PatientParams:
    """Per-patient latent curve parameters, all interior."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if not (self.a.shape == self.b.shape == self.c.shape):
            raise ModelError("a, b, c must share one shape")
        if np.any((self.a <= 0) | (self.a >= 1)) or np.any((self.b <= 0) | (self.b >= 1)):
            raise ModelError("a and b must lie strictly inside (0, 1)")
        if np.any(self.c <= 0):
            raise ModelError("c must be > 0")

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass
class Dataset:
    """Covariates, pre-event levels and packed sparse observations.

    obs_patient / obs_t / obs_y are parallel arrays over all observations;
    obs_patient holds row indices into x and s.
    """

    x: np.ndarray  # (n, k)
    s: np.ndarray  # (n,)
    obs_patient: np.ndarray  # (n_obs,) int
    obs_t: np.ndarray  # (n_obs,) float, > 0
    obs_y: np.ndarray  # (n_obs,) float, in [0, 1]
    patient_ids: list[str] | None = None

    def __post_init__(self) -> None:
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.s = np.asarray(self.s, dtype=float)
        self.obs_patient = np.asarray(self.obs_patient, dtype=int)
        self.obs_t = np.asarray(self.obs_t, dtype=float)
        self.obs_y = np.asarray(self.obs_y, dtype=float)
        if self.x.shape[0] != len(self.s):
            raise ModelError("x and s disagree on patient count")
        if np.any(self.s <= 0) or np.any(self.s > 1):
            raise ModelError("s must lie in (0, 1]")
        if np.any(self.obs_t <= 0):
            raise ModelError("observation times must be > 0")
        if np.any((self.obs_y < 0) | (self.obs_y > 1)):
            raise ModelError("observed values must lie in [0, 1]")
        if len(self.obs_patient) and (self.obs_patient.min() < 0 or self.obs_patient.max() >= len(self.s)):
            raise ModelError("obs_patient index out of range")

    @property
    def n(self) -> int:
        return len(self.s)

    @property
    def k(self) -> int:
        return self.x.shape[1]

    @property
    def n_obs(self) -> int:
        return len(self.obs_y)

    @classmethod
    def from_patients(cls, x, s, observations, patient_ids=None) -> "Dataset":
        """Build from per-patient {time: value} mappings."""
        idx, ts, ys = [], [], []
        for i, obs in enumerate(observations):
            for t, y in sorted(obs.items()):
                idx.append(i)
                ts.append(float(t))
                ys.append(float(y))
        return cls(x=np.asarray(x), s=np.asarray(s), obs_patient=np.array(idx, dtype=int),
                   obs_t=np.array(ts), obs_y=np.array(ys), patient_ids=patient_ids)

    def observations_of(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        mask = self.obs_patient == i
        return self.obs_t[mask], self.obs_y[mask]


def bias_terms(hyper: Hyperparameters) -> tuple[float, float, float]:
    """(z_a, z_b, z_c) centering each link at the average-shape parameter."""
    return float(logit(hyper.mu_a)), float(logit(hyper.mu_b)), float(np.log(hyper.mu_c))


def _linpred(x, b):
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if x.shape[-1] != b.shape[0]:
        raise ModelError(f"covariate dimension {x.shape[-1]} != coefficient dimension {b.shape[0]}")
    return x @ b


def mode_a(x, b_a, z_a: float):
    """Conditional mode of a_i: logistic(z_a + b_a . x)."""
    return expit(z_a + _linpred(x, b_a))


def mode_b(x, b_b, z_b: float):
    return expit(z_b + _linpred(x, b_b))


def mode_c(x, b_c, z_c: float):
    """Conditional mode of c_i: exp(z_c + b_c . x)."""
    return np.exp(z_c + _linpred(x, b_c))


def clamp_mode(f):
    """Keep a latent curve value usable as a beta mode."""
    return np.clip(f, F_EPS, 1.0 - F_EPS)


def log_likelihood_obs(y, f, theta: float, p: float, phi_m: float):
    """Mixed discrete-continuous observation log density.

    y in {0, 1} hits the bernoulli component (the beta density vanishes at
    the endpoints, so the decomposition is unambiguous); interior y gets the
    mode-centered beta.  Vectorized over y and f.
    """
    y = np.asarray(y, dtype=float)
    f = clamp_mode(np.asarray(f, dtype=float))
    boundary = (y == 0.0) | (y == 1.0)
    with np.errstate(divide="ignore"):
        disc = np.log(theta) + np.where(y == 1.0, np.log(p), np.log1p(-p))
        s = 1.0 / phi_m - 1.0
        cont = np.log1p(-theta) + beta_log_pdf_raw(y, 1.0 + s * f, 1.0 + s * (1.0 - f))
    out = np.where(boundary, disc, cont)
    return float(out) if out.ndim == 0 else out


def truncated_exp_log_pdf(x, lam: float):
    """Log density of exponential(lam) truncated on the right at 1.

    Stable down to lam -> 0, where the density tends to uniform(0, 1).
    """
    x = np.asarray(x, dtype=float)
    if lam < 1e-12:
        out = np.where((x > 0) & (x < 1), 0.0, -np.inf)
    else:
        norm = np.log(lam) - np.log(-np.expm1(-lam))
        out = np.where((x > 0) & (x < 1), norm - lam * x, -np.inf)
    return float(out) if out.ndim == 0 else out


def _normal_log_pdf(x, sd):
    x = np.asarray(x, dtype=float)
    return -0.5 * np.log(2.0 * np.pi) - np.log(sd) - 0.5 * (x / sd) ** 2


def log_prior(shared: SharedParams, hyper: Hyperparameters) -> float:
    """Log prior over shared parameters (theta, p are uniform: zero)."""
    out = 0.0
    out += float(np.sum(_normal_log_pdf(shared.b_a, hyper.s_a)))
    out += float(np.sum(_normal_log_pdf(shared.b_b, hyper.s_b)))
    out += float(np.sum(_normal_log_pdf(shared.b_c, hyper.s_c)))
    if not hyper.fixed_phis:
        out += float(truncated_exp_log_pdf(shared.phi_a, hyper.lambda_a))
        out += float(truncated_exp_log_pdf(shared.phi_b, hyper.lambda_b))
        out += float(truncated_exp_log_pdf(shared.phi_c, hyper.lambda_c))
    out += float(truncated_exp_log_pdf(shared.phi_m, hyper.lambda_m))
    return out


def hierarchy_terms(shared: SharedParams, patients: PatientParams, x: np.ndarray,
                    hyper: Hyperparameters) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-patient log densities of (a_i, b_i, c_i) given modes and spreads."""
    z_a, z_b, z_c = bias_terms(hyper)
    m_a = mode_a(x, shared.b_a, z_a)
    m_b = mode_b(x, shared.b_b, z_b)
    m_c = mode_c(x, shared.b_c, z_c)
    s_a = 1.0 / shared.phi_a - 1.0
    s_b = 1.0 / shared.phi_b - 1.0
    la = beta_log_pdf_raw(patients.a, 1.0 + s_a * m_a, 1.0 + s_a * (1.0 - m_a))
    lb = beta_log_pdf_raw(patients.b, 1.0 + s_b * m_b, 1.0 + s_b * (1.0 - m_b))
    alpha_c = 1.0 / shared.phi_c
    lc = gamma_log_pdf_raw(patients.c, alpha_c, (alpha_c - 1.0) / m_c)
    return la, lb, lc


def log_hierarchy(shared: SharedParams, patients: PatientParams, dataset: Dataset,
                  hyper: Hyperparameters) -> float:
    la, lb, lc = hierarchy_terms(shared, patients, dataset.x, hyper)
    return float(np.sum(la) + np.sum(lb) + np.sum(lc))


def latent_values(patients: PatientParams, dataset: Dataset) -> np.ndarray:
    """f_i(t) at every observation, packed like the dataset arrays."""
    i = dataset.obs_patient
    g = (1.0 - patients.a[i]) * (1.0 - patients.b[i] * np.exp(-dataset.obs_t / patients.c[i]))
    return dataset.s[i] * g


def log_posterior(shared: SharedParams, patients: PatientParams, dataset: Dataset,
                  hyper: Hyperparameters) -> float:
    """Unnormalized joint log density; finite at all interior parameters."""
    out = log_prior(shared, hyper)
    out += log_hierarchy(shared, patients, dataset, hyper)
    f = latent_values(patients, dataset)
    out += float(np.sum(log_likelihood_obs(dataset.obs_y, f, shared.theta, shared.p, shared.phi_m)))
    if not np.isfinite(out):
        raise ModelError("non-finite log posterior at interior parameters (model bug)")
    return out


def _logit_jac(v):
    # log |d sigmoid / d x| at sigmoid(x) = v
    return np.log(v) + np.log1p(-v)


class ModelTransform:
    """Bijection between constrained parameters and an unconstrained vector.

    Layout: b_a, b_b, b_c (identity), then logit(phi_a/b/c) unless the
    spreads are fixed, logit(theta), logit(p), logit(phi_m), then per patient
    logit(a_i), logit(b_i), log(c_i).
    """

    def __init__(self, k: int, n: int, hyper: Hyperparameters):
        self.k = k
        self.n = n
        self.hyper = hyper
        self.shared_names: list[str] = []
        for tag in ("b_a", "b_b", "b_c"):
            self.shared_names += [f"{tag}[{j}]" for j in range(k)] if k > 1 else [tag]
        if not hyper.fixed_phis:
            self.shared_names += ["phi_a", "phi_b", "phi_c"]
        self.shared_names += ["theta", "p", "phi_m"]
        self.n_shared = len(self.shared_names)
        self.dim = self.n_shared + 3 * n

    def to_unconstrained(self, shared: SharedParams, patients: PatientParams) -> tuple[np.ndarray, float]:
        """Returns the unconstrained vector and log |Jacobian| of the inverse
        map, so unconstrained log density = constrained + that term."""
        parts = [shared.b_a, shared.b_b, shared.b_c]
        logjac = 0.0
        unit = [shared.theta, shared.p, shared.phi_m]
        if not self.hyper.fixed_phis:
            unit = [shared.phi_a, shared.phi_b, shared.phi_c] + unit
        for v in unit:
            if not 0.0 < v < 1.0:
                raise ModelError("boundary value cannot be transformed")
            logjac += float(_logit_jac(v))
        parts.append(logit(np.asarray(unit)))
        for arr in (patients.a, patients.b):
            if np.any((arr <= 0) | (arr >= 1)):
                raise ModelError("boundary value cannot be transformed")
            parts.append(logit(arr))
            logjac += float(np.sum(_logit_jac(arr)))
        parts.append(np.log(patients.c))
        logjac += float(np.sum(np.log(patients.c)))
        return np.concatenate(parts), logjac

    def from_unconstrained(self, vec: np.ndarray) -> tuple[SharedParams, PatientParams]:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.dim,):
            raise ModelError(f"expected vector of length {self.dim}, got {vec.shape}")
        k, n = self.k, self.n
        pos = 0
        b_a = vec[pos:pos + k]; pos += k
        b_b = vec[pos:pos + k]; pos += k
        b_c = vec[pos:pos + k]; pos += k
        if self.hyper.fixed_phis:
            phi_a, phi_b, phi_c = self.hyper.phi_a, self.hyper.phi_b, self.hyper.phi_c
        else:
            phi_a, phi_b, phi_c = expit(vec[pos:pos + 3]); pos += 3
        theta, p, phi_m = expit(vec[pos:pos + 3]); pos += 3
        shared = SharedParams(b_a=b_a, b_b=b_b, b_c=b_c, phi_a=float(phi_a), phi_b=float(phi_b),
                              phi_c=float(phi_c), theta=float(theta), p=float(p), phi_m=float(phi_m))
        a = expit(vec[pos:pos + n]); pos += n
        b = expit(vec[pos:pos + n]); pos += n
        c = np.exp(vec[pos:pos + n])
        return shared, PatientParams(a=a, b=b, c=c)

    def log_jacobian(self, vec: np.ndarray) -> float:
        shared, patients = self.from_unconstrained(vec)
        return self.to_unconstrained(shared, patients)[1]

    def log_posterior_unconstrained(self, vec: np.ndarray, dataset: Dataset) -> float:
        shared, patients = self.from_unconstrained(vec)
        return log_posterior(shared, patients, dataset, self.hyper) + self.log_jacobian(vec)


_HYPER_KEYS = {
    "mu_a", "mu_b", "mu_c", "s_a", "s_b", "s_c",
    "lambda_a", "lambda_b", "lambda_c", "lambda_m",
    "phi_a", "phi_b", "phi_c",
}


def load_hyperparameters(path) -> Hyperparameters:
    """Read hyperparameters from a flat key = value text file.

    Lines are `key = value`; blank lines and `#` comments are skipped.
    Absent phi_* keys select the prior-spread mode.
    """
    values: dict[str, float] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        if key not in _HYPER_KEYS:
            raise ModelError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ModelError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError as exc:
            raise ModelError(f"{path}:{lineno}: bad number {val.strip()!r}") from exc
    missing = {"mu_a", "mu_b", "mu_c"} - set(values)
    if missing:
        raise ModelError(f"{path}: missing required keys {sorted(missing)}")
    fixed = [k for k in ("phi_a", "phi_b", "phi_c") if k in values]
    if fixed and len(fixed) != 3:
        raise ModelError(f"{path}: fix all of phi_a, phi_b, phi_c or none, got {fixed}")
    return Hyperparameters(**values)
