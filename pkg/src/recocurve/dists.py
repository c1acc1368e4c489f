"""Mode/spread parameterizations of the beta and gamma distributions.

Both families are indexed by their mode m and a spread phi in (0, 1).  The
construction guarantees unimodality with interior mode m for *every* m, which
the usual mean-parameterized families do not:

    beta:   alpha = 1 + (1/phi - 1) m,   beta = 1 + (1/phi - 1)(1 - m)
    gamma:  alpha = 1/phi,               beta = (1/phi - 1) / m

Variance increases in phi at fixed m, hence "spread".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

__all__ = [
    "DistParameterError",
    "ModeSpreadBeta",
    "ModeSpreadGamma",
    "beta_to_standard",
    "gamma_to_standard",
    "log_pdf_beta",
    "log_pdf_gamma",
    "sample_beta",
    "sample_gamma",
]


class DistParameterError(ValueError):
    """Parameters outside the unimodality-guaranteeing region."""


def beta_to_standard(m: float, phi: float) -> tuple[float, float]:
    """Convert (mode, spread) to standard beta (alpha, beta).

    Requires m in (0, 1) and phi in (0, 1); both converted shape parameters
    then exceed 1, so the density is unimodal with mode exactly m.
    Invalid parameters fail loudly -- no clamping.
    """
    if not (np.isfinite(m) and 0.0 < m < 1.0):
        raise DistParameterError(f"beta mode must be in (0, 1), got {m}")
    if not (np.isfinite(phi) and 0.0 < phi < 1.0):
        raise DistParameterError(f"spread must be in (0, 1), got {phi}")
    s = 1.0 / phi - 1.0
    return 1.0 + s * m, 1.0 + s * (1.0 - m)


def gamma_to_standard(m: float, phi: float) -> tuple[float, float]:
    """Convert (mode, spread) to standard gamma (shape alpha, rate beta)."""
    if not (np.isfinite(m) and m > 0.0):
        raise DistParameterError(f"gamma mode must be > 0, got {m}")
    if not (np.isfinite(phi) and 0.0 < phi < 1.0):
        raise DistParameterError(f"spread must be in (0, 1), got {phi}")
    alpha = 1.0 / phi
    return alpha, (alpha - 1.0) / m


@dataclass(frozen=True)
class ModeSpreadBeta:
    m: float
    phi: float

    def __post_init__(self) -> None:
        beta_to_standard(self.m, self.phi)  # validates

    def to_standard(self) -> tuple[float, float]:
        return beta_to_standard(self.m, self.phi)


@dataclass(frozen=True)
class ModeSpreadGamma:
    m: float
    phi: float

    def __post_init__(self) -> None:
        gamma_to_standard(self.m, self.phi)

    def to_standard(self) -> tuple[float, float]:
        return gamma_to_standard(self.m, self.phi)


def beta_log_pdf_raw(x, alpha, beta):
    """Beta log density for standard parameters; -inf outside (0, 1).

    Vectorized in x and in (alpha, beta); shapes broadcast.
    """
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xs = np.where(inside, x, 0.5)
    out = (alpha - 1.0) * np.log(xs) + (beta - 1.0) * np.log1p(-xs) - betaln(alpha, beta)
    return np.where(inside, out, -np.inf)


def gamma_log_pdf_raw(x, alpha, beta):
    """Gamma log density (shape/rate); -inf outside (0, inf)."""
    x = np.asarray(x, dtype=float)
    inside = x > 0.0
    xs = np.where(inside, x, 1.0)
    out = alpha * np.log(beta) + (alpha - 1.0) * np.log(xs) - beta * xs - gammaln(alpha)
    return np.where(inside, out, -np.inf)


def log_pdf_beta(x, dist: ModeSpreadBeta):
    """Log density of a mode/spread beta at x; -inf at or beyond the
    endpoints rather than an error, so the mixture likelihood composes."""
    alpha, beta = dist.to_standard()
    out = beta_log_pdf_raw(x, alpha, beta)
    return float(out) if out.ndim == 0 else out


def log_pdf_gamma(x, dist: ModeSpreadGamma):
    """Log density of a mode/spread gamma at x; -inf for x <= 0."""
    alpha, beta = dist.to_standard()
    out = gamma_log_pdf_raw(x, alpha, beta)
    return float(out) if out.ndim == 0 else out


def sample_beta(dist: ModeSpreadBeta, rng: np.random.Generator, size=None):
    """Draw from a mode/spread beta using the caller's generator."""
    alpha, beta = dist.to_standard()
    return rng.beta(alpha, beta, size=size)


def sample_gamma(dist: ModeSpreadGamma, rng: np.random.Generator, size=None):
    """Draw from a mode/spread gamma.

    The generator's gamma sampler is a rejection method valid for all
    shape > 1, which the phi in (0, 1) constraint guarantees.
    """
    alpha, beta = dist.to_standard()
    return rng.gamma(alpha, 1.0 / beta, size=size)
