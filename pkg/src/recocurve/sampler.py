"""Adaptive random-walk Metropolis-within-Gibbs and posterior utilities.

The engine walks a list of coordinate blocks in unconstrained space.  During
warmup each block's proposal scale is nudged toward a target acceptance rate
(Robbins-Monro on the log scale); adaptation freezes once warmup ends so the
kept phase satisfies detailed balance.  Chains are independent, each seeded
as base seed + chain index, and results are bitwise reproducible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "SamplerError",
    "SamplerConfig",
    "PosteriorSamples",
    "run_mcmc",
    "gelman_rubin",
    "posterior_quantiles",
    "save_samples",
    "load_samples",
    "write_summary",
]


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    n_chains: int = 4
    n_warmup: int = 2500
    n_keep: int = 2500
    thinning: int = 1
    seed: int = 0
    target_accept: float = 0.44
    initial_scale: float = 0.5
    init_range: float = 2.0  # per-chain inits drawn uniformly in +/- this

    def __post_init__(self) -> None:
        if self.n_chains < 1 or self.n_keep < 1 or self.n_warmup < 0 or self.thinning < 1:
            raise ValueError("counts must be positive (warmup may be zero)")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target acceptance must be in (0, 1)")


@dataclass
class PosteriorSamples:
    """Kept draws in constrained space, one array of shape (n_chains, n_keep)
    per named parameter, plus per-block acceptance statistics."""

    draws: dict[str, np.ndarray]
    acceptance: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def n_chains(self) -> int:
        return next(iter(self.draws.values())).shape[0]

    @property
    def n_keep(self) -> int:
        return next(iter(self.draws.values())).shape[1]

    @property
    def names(self) -> list[str]:
        return list(self.draws)

    def pooled(self, name: str) -> np.ndarray:
        if name not in self.draws:
            raise KeyError(name)
        return self.draws[name].reshape(-1)


def adapt_log_scale(log_scale: float, accept_prob: float, step: int, target: float) -> float:
    """One Robbins-Monro update of a proposal log scale."""
    gamma = (step + 1.0) ** -0.6
    return log_scale + gamma * (accept_prob - target)


def run_mcmc(log_density, initial, config: SamplerConfig, blocks=None,
             param_names=None, constrain=None) -> PosteriorSamples:
    """Sample an arbitrary unconstrained-space log density.

    initial: array (n_chains, dim) of starting points, or (dim,) used for
    every chain.  blocks: list of coordinate index arrays (default: one
    scalar block per coordinate).  constrain: optional map vec -> vec of the
    same length applied before storage (identity by default); param_names
    labels the stored coordinates.
    """
    init = np.atleast_2d(np.asarray(initial, dtype=float))
    if init.shape[0] == 1 and config.n_chains > 1:
        init = np.repeat(init, config.n_chains, axis=0)
    if init.shape[0] != config.n_chains:
        raise SamplerError(f"need {config.n_chains} initial points, got {init.shape[0]}")
    dim = init.shape[1]
    if blocks is None:
        blocks = [np.array([j]) for j in range(dim)]
    blocks = [np.asarray(b, dtype=int) for b in blocks]
    if param_names is None:
        param_names = [f"x[{j}]" for j in range(dim)] if dim > 1 else ["x"]
    if constrain is None:
        constrain = lambda v: v

    for c in range(config.n_chains):
        lp = log_density(init[c])
        if not np.isfinite(lp):
            raise SamplerError(f"non-finite log density at initial point of chain {c}")

    kept = np.empty((config.n_chains, config.n_keep, dim))
    accept_counts = np.zeros(len(blocks))
    post_counts = np.zeros(len(blocks))
    n_iter = config.n_warmup + config.n_keep * config.thinning

    for c in range(config.n_chains):
        rng = np.random.default_rng(config.seed + c)
        x = init[c].copy()
        lp = log_density(x)
        log_scales = np.full(len(blocks), math.log(config.initial_scale))
        stored = 0
        for it in range(n_iter):
            warm = it < config.n_warmup
            for bi, idx in enumerate(blocks):
                prop = x.copy()
                prop[idx] += math.exp(log_scales[bi]) * rng.standard_normal(len(idx))
                lpp = log_density(prop)
                log_alpha = lpp - lp
                accept_prob = math.exp(min(0.0, log_alpha)) if np.isfinite(log_alpha) else 0.0
                if np.log(rng.uniform()) < log_alpha:
                    x, lp = prop, lpp
                    if not warm:
                        accept_counts[bi] += 1
                if warm:
                    log_scales[bi] = adapt_log_scale(log_scales[bi], accept_prob, it, config.target_accept)
                else:
                    post_counts[bi] += 1
            if not warm and (it - config.n_warmup) % config.thinning == 0 and stored < config.n_keep:
                kept[c, stored] = constrain(x)
                stored += 1

    acceptance = {f"block_{bi}": float(accept_counts[bi] / max(post_counts[bi], 1))
                  for bi in range(len(blocks))}
    warnings = [f"{name}: zero post-warmup acceptance"
                for name, rate in acceptance.items() if rate == 0.0]
    draws = {name: kept[:, :, j] for j, name in enumerate(param_names)}
    return PosteriorSamples(draws=draws, acceptance=acceptance, warnings=warnings)


def gelman_rubin(samples: PosteriorSamples, name: str) -> float:
    """Between/within variance ratio statistic R-hat for one parameter."""
    chains = samples.draws[name]
    m, n = chains.shape
    if m < 2:
        raise SamplerError("R-hat needs at least 2 chains")
    if n < 10:
        raise SamplerError("R-hat needs at least 10 kept draws")
    means = chains.mean(axis=1)
    w = float(np.mean(chains.var(axis=1, ddof=1)))
    b_over_n = float(np.var(means, ddof=1))
    if w == 0.0:
        return 1.0 if b_over_n == 0.0 else np.inf
    var_plus = (n - 1.0) / n * w + b_over_n
    return float(np.sqrt(var_plus / w))


def max_gelman_rubin(samples: PosteriorSamples) -> float:
    return max(gelman_rubin(samples, name) for name in samples.names)


def posterior_quantiles(samples: PosteriorSamples, name: str, qs) -> np.ndarray:
    """Quantiles over pooled post-warmup draws, linear interpolation between
    order statistics (numpy's default rule)."""
    pooled = samples.pooled(name)
    if pooled.size == 0:
        raise SamplerError("empty samples")
    return np.quantile(pooled, np.asarray(qs, dtype=float))


def save_samples(samples: PosteriorSamples, path) -> None:
    """One JSON record per kept draw: chain, iteration, named values."""
    path = Path(path)
    names = samples.names
    with path.open("w", encoding="utf-8") as fh:
        for c in range(samples.n_chains):
            for i in range(samples.n_keep):
                rec = {"chain": c, "iteration": i}
                rec.update({name: samples.draws[name][c, i] for name in names})
                fh.write(json.dumps(rec) + "\n")


def load_samples(path) -> PosteriorSamples:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    if not records:
        raise SamplerError(f"{path}: no records")
    n_chains = max(r["chain"] for r in records) + 1
    n_keep = max(r["iteration"] for r in records) + 1
    names = [k for k in records[0] if k not in ("chain", "iteration")]
    draws = {name: np.full((n_chains, n_keep), np.nan) for name in names}
    for r in records:
        for name in names:
            draws[name][r["chain"], r["iteration"]] = r[name]
    return PosteriorSamples(draws=draws)


def write_summary(samples: PosteriorSamples, path, extra: dict | None = None) -> dict:
    """Sidecar summary: R-hat per parameter plus acceptance rates."""
    rhat = {name: (gelman_rubin(samples, name) if samples.n_chains >= 2 else float("nan"))
            for name in samples.names}
    finite = [v for v in rhat.values() if np.isfinite(v)]
    summary = {
        "r_hat": rhat,
        "max_r_hat": max(finite) if finite else float("nan"),
        "acceptance": samples.acceptance,
        "warnings": samples.warnings,
        "n_chains": samples.n_chains,
        "n_keep": samples.n_keep,
    }
    if extra:
        summary.update(extra)
    Path(path).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary
