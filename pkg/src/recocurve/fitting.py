"""Structured MCMC fit of the hierarchical model.

The generic engine in sampler.py recomputes the full density per block; for
the hierarchical model that is wasteful, because the conditional structure
localizes every block's delta:

  * regression weights and spreads touch only the patient-parameter
    hierarchy terms, never the observation likelihood;
  * theta and p reweight the mixture without touching the beta density;
  * phi_m touches the interior-observation beta density at fixed modes;
  * patient (a_i, b_i, c_i) triples are conditionally independent given the
    shared parameters, so all patients propose and accept in parallel.

Adaptation, initialization and diagnostics follow the same contract as the
generic engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .dists import beta_log_pdf_raw, gamma_log_pdf_raw
from .model import (
    Dataset,
    Hyperparameters,
    SharedParams,
    bias_terms,
    clamp_mode,
    truncated_exp_log_pdf,
)
from .sampler import PosteriorSamples, SamplerConfig, SamplerError, adapt_log_scale

__all__ = [
    "fit_model",
    "shared_from_draws",
    "posterior_predictive_shapes",
    "posterior_predictive_curves",
    "posterior_median_curve",
]

_INIT_EPS = 1e-3


def _normal_lp(x, sd):
    return -0.5 * np.log(2.0 * np.pi) - np.log(sd) - 0.5 * (np.asarray(x) / sd) ** 2


def _beta_lp_mode(x, m, phi):
    s = 1.0 / phi - 1.0
    return beta_log_pdf_raw(x, 1.0 + s * m, 1.0 + s * (1.0 - m))


def _gamma_lp_mode(x, m, phi):
    alpha = 1.0 / phi
    return gamma_log_pdf_raw(x, alpha, (alpha - 1.0) / m)


@dataclass
class _ChainState:
    """Mutable per-chain state with cached density pieces."""

    b_a: np.ndarray
    b_b: np.ndarray
    b_c: np.ndarray
    u_phi: np.ndarray  # unconstrained [phi_a, phi_b, phi_c] or empty if fixed
    u_mix: np.ndarray  # unconstrained [theta, p, phi_m]
    ua: np.ndarray
    ub: np.ndarray
    uc: np.ndarray


def _shared_param_names(k: int, fixed_phis: bool) -> list[str]:
    names = []
    for tag in ("b_a", "b_b", "b_c"):
        names += [f"{tag}[{j}]" for j in range(k)] if k > 1 else [tag]
    if not fixed_phis:
        names += ["phi_a", "phi_b", "phi_c"]
    names += ["theta", "p", "phi_m"]
    return names


def fit_model(dataset: Dataset, hyper: Hyperparameters, config: SamplerConfig,
              store_patient_params: bool = False) -> PosteriorSamples:
    """Run the blocked adaptive sampler on the full hierarchical posterior.

    Returns kept draws of the shared parameters (and per-patient parameters
    when requested) in constrained space.  Deterministic given config.seed.
    """
    n, k = dataset.n, dataset.k
    x = dataset.x
    s_vec = dataset.s
    z_a, z_b, z_c = bias_terms(hyper)
    fixed = hyper.fixed_phis

    # Split observations once: boundary values hit the bernoulli component
    # and never touch f; interior values carry the beta density.
    y = dataset.obs_y
    boundary = (y == 0.0) | (y == 1.0)
    n1 = int(np.sum(y == 1.0))
    n0 = int(np.sum(y == 0.0))
    idx_int = dataset.obs_patient[~boundary]
    t_int = dataset.obs_t[~boundary]
    y_int = dataset.obs_y[~boundary]
    n_int = len(y_int)
    s_int = s_vec[idx_int]

    shared_names = _shared_param_names(k, fixed)
    patient_names = []
    if store_patient_params:
        for tag in ("a", "b", "c"):
            patient_names += [f"{tag}[{i}]" for i in range(n)]
    all_names = shared_names + patient_names

    block_names = ["b_a", "b_b", "b_c", "b_a_joint", "b_b_joint", "b_c_joint"] \
        + ([] if fixed else ["phi_a", "phi_b", "phi_c",
                             "phi_a_joint", "phi_b_joint", "phi_c_joint"]) \
        + ["theta", "p", "phi_m", "patients"]
    n_blocks = len(block_names)
    accept_counts = np.zeros(n_blocks)
    post_counts = np.zeros(n_blocks)
    n_iter = config.n_warmup + config.n_keep * config.thinning
    kept = np.empty((config.n_chains, config.n_keep, len(all_names)))

    def interior_f(a, b, c):
        g = (1.0 - a[idx_int]) * (1.0 - b[idx_int] * np.exp(-t_int / c[idx_int]))
        return clamp_mode(s_int * g)

    for chain in range(config.n_chains):
        rng = np.random.default_rng(config.seed + chain)
        r = config.init_range
        st = _ChainState(
            b_a=rng.uniform(-r, r, k), b_b=rng.uniform(-r, r, k), b_c=rng.uniform(-r, r, k),
            u_phi=np.empty(0) if fixed else rng.uniform(-r, r, 3),
            u_mix=rng.uniform(-r, r, 3),
            ua=np.empty(n), ub=np.empty(n), uc=np.empty(n),
        )
        # Patients start at their covariate-implied modes.
        m_a = expit(z_a + x @ st.b_a)
        m_b = expit(z_b + x @ st.b_b)
        m_c = np.exp(z_c + x @ st.b_c)
        st.ua = logit(np.clip(m_a, _INIT_EPS, 1.0 - _INIT_EPS))
        st.ub = logit(np.clip(m_b, _INIT_EPS, 1.0 - _INIT_EPS))
        st.uc = np.log(m_c)

        phi_a, phi_b, phi_c = (hyper.phi_a, hyper.phi_b, hyper.phi_c) if fixed \
            else tuple(expit(st.u_phi))
        theta, p, phi_m = expit(st.u_mix)
        a = expit(st.ua)
        b = expit(st.ub)
        c = np.exp(st.uc)

        ha = _beta_lp_mode(a, m_a, phi_a)
        hb = _beta_lp_mode(b, m_b, phi_b)
        hc = _gamma_lp_mode(c, m_c, phi_c)
        f_int = interior_f(a, b, c)
        lbeta = _beta_lp_mode(y_int, f_int, phi_m)
        for name, arr in (("b_a", ha), ("b_b", hb), ("b_c", hc), ("likelihood", lbeta)):
            if not np.all(np.isfinite(arr)):
                raise SamplerError(f"non-finite log density at init of chain {chain} (block {name})")

        log_scales = np.full(n_blocks, math.log(config.initial_scale))
        patient_scales = np.full(n, config.initial_scale)
        pat_block = n_blocks - 1
        stored = 0

        for it in range(n_iter):
            warm = it < config.n_warmup
            bi = 0

            # --- regression weight blocks ------------------------------
            for tag in ("a", "b", "c"):
                cur_b = getattr(st, f"b_{tag}")
                prop_b = cur_b + math.exp(log_scales[bi]) * rng.standard_normal(k)
                if tag == "a":
                    m_new = expit(z_a + x @ prop_b)
                    h_new = _beta_lp_mode(a, m_new, phi_a)
                    h_old, sd = ha, hyper.s_a
                elif tag == "b":
                    m_new = expit(z_b + x @ prop_b)
                    h_new = _beta_lp_mode(b, m_new, phi_b)
                    h_old, sd = hb, hyper.s_b
                else:
                    m_new = np.exp(z_c + x @ prop_b)
                    h_new = _gamma_lp_mode(c, m_new, phi_c)
                    h_old, sd = hc, hyper.s_c
                delta = float(np.sum(h_new) - np.sum(h_old)) \
                    + float(np.sum(_normal_lp(prop_b, sd)) - np.sum(_normal_lp(cur_b, sd)))
                acc_prob = math.exp(min(0.0, delta)) if np.isfinite(delta) else 0.0
                if np.log(rng.uniform()) < delta:
                    setattr(st, f"b_{tag}", prop_b)
                    if tag == "a":
                        m_a, ha = m_new, h_new
                    elif tag == "b":
                        m_b, hb = m_new, h_new
                    else:
                        m_c, hc = m_new, h_new
                    if not warm:
                        accept_counts[bi] += 1
                if warm:
                    log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
                else:
                    post_counts[bi] += 1
                bi += 1

            # --- joint translation moves -------------------------------
            # Shifting a coefficient vector alone mixes at the width of its
            # narrow conditional; shifting the patient parameters along with
            # the implied mode change (exact in unconstrained space) walks
            # the marginal instead.
            for tag in ("a", "b", "c"):
                cur_b = getattr(st, f"b_{tag}")
                delta_b = math.exp(log_scales[bi]) * rng.standard_normal(k)
                prop_b = cur_b + delta_b
                shift = x @ delta_b
                if tag == "a":
                    u_new = st.ua + shift
                    v_new = expit(u_new)
                    m_new = expit(z_a + x @ prop_b)
                    h_new = _beta_lp_mode(v_new, m_new, phi_a)
                    h_old, sd = ha, hyper.s_a
                    f_new = interior_f(v_new, b, c)
                    djac = float(np.sum(np.log(v_new) + np.log1p(-v_new)
                                        - np.log(a) - np.log1p(-a)))
                elif tag == "b":
                    u_new = st.ub + shift
                    v_new = expit(u_new)
                    m_new = expit(z_b + x @ prop_b)
                    h_new = _beta_lp_mode(v_new, m_new, phi_b)
                    h_old, sd = hb, hyper.s_b
                    f_new = interior_f(a, v_new, c)
                    djac = float(np.sum(np.log(v_new) + np.log1p(-v_new)
                                        - np.log(b) - np.log1p(-b)))
                else:
                    u_new = st.uc + shift
                    v_new = np.exp(u_new)
                    m_new = np.exp(z_c + x @ prop_b)
                    h_new = _gamma_lp_mode(v_new, m_new, phi_c)
                    h_old, sd = hc, hyper.s_c
                    f_new = interior_f(a, b, v_new)
                    djac = float(np.sum(shift))
                lbeta_new = _beta_lp_mode(y_int, f_new, phi_m)
                delta = float(np.sum(h_new) - np.sum(h_old)) \
                    + float(np.sum(lbeta_new) - np.sum(lbeta)) + djac \
                    + float(np.sum(_normal_lp(prop_b, sd)) - np.sum(_normal_lp(cur_b, sd)))
                acc_prob = math.exp(min(0.0, delta)) if np.isfinite(delta) else 0.0
                if np.isfinite(delta) and np.log(rng.uniform()) < delta:
                    setattr(st, f"b_{tag}", prop_b)
                    f_int, lbeta = f_new, lbeta_new
                    if tag == "a":
                        m_a, ha, a = m_new, h_new, v_new
                        st.ua = u_new
                    elif tag == "b":
                        m_b, hb, b = m_new, h_new, v_new
                        st.ub = u_new
                    else:
                        m_c, hc, c = m_new, h_new, v_new
                        st.uc = u_new
                    if not warm:
                        accept_counts[bi] += 1
                if warm:
                    log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
                else:
                    post_counts[bi] += 1
                bi += 1

            # --- spread blocks (skipped when fixed) --------------------
            if not fixed:
                for j, tag in enumerate(("a", "b", "c")):
                    u_new = st.u_phi[j] + math.exp(log_scales[bi]) * rng.standard_normal()
                    phi_new = float(expit(u_new))
                    phi_old = (phi_a, phi_b, phi_c)[j]
                    lam = (hyper.lambda_a, hyper.lambda_b, hyper.lambda_c)[j]
                    if tag == "a":
                        h_new = _beta_lp_mode(a, m_a, phi_new)
                        h_old = ha
                    elif tag == "b":
                        h_new = _beta_lp_mode(b, m_b, phi_new)
                        h_old = hb
                    else:
                        h_new = _gamma_lp_mode(c, m_c, phi_new)
                        h_old = hc
                    delta = float(np.sum(h_new) - np.sum(h_old)) \
                        + float(truncated_exp_log_pdf(phi_new, lam) - truncated_exp_log_pdf(phi_old, lam)) \
                        + math.log(phi_new * (1.0 - phi_new)) - math.log(phi_old * (1.0 - phi_old))
                    acc_prob = math.exp(min(0.0, delta)) if np.isfinite(delta) else 0.0
                    if np.log(rng.uniform()) < delta:
                        st.u_phi[j] = u_new
                        if tag == "a":
                            phi_a, ha = phi_new, h_new
                        elif tag == "b":
                            phi_b, hb = phi_new, h_new
                        else:
                            phi_c, hc = phi_new, h_new
                        if not warm:
                            accept_counts[bi] += 1
                    if warm:
                        log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
                    else:
                        post_counts[bi] += 1
                    bi += 1

                # --- joint spread moves --------------------------------
                # The spread and the dispersion of the patient parameters
                # around their modes form the same funnel as the weights:
                # rescale the unconstrained patient deviations by the
                # implied posterior-width ratio when proposing a new spread.
                for j, tag in enumerate(("a", "b", "c")):
                    u_new = st.u_phi[j] + math.exp(log_scales[bi]) * rng.standard_normal()
                    phi_new = float(expit(u_new))
                    phi_old = (phi_a, phi_b, phi_c)[j]
                    lam = (hyper.lambda_a, hyper.lambda_b, hyper.lambda_c)[j]
                    ratio = math.sqrt(phi_new / phi_old)
                    if tag == "a":
                        center = logit(m_a)
                        up_new = center + ratio * (st.ua - center)
                        v_new = expit(up_new)
                        h_new = _beta_lp_mode(v_new, m_a, phi_new)
                        h_old = ha
                        f_new = interior_f(v_new, b, c)
                        dpjac = float(np.sum(np.log(v_new) + np.log1p(-v_new)
                                             - np.log(a) - np.log1p(-a)))
                    elif tag == "b":
                        center = logit(m_b)
                        up_new = center + ratio * (st.ub - center)
                        v_new = expit(up_new)
                        h_new = _beta_lp_mode(v_new, m_b, phi_new)
                        h_old = hb
                        f_new = interior_f(a, v_new, c)
                        dpjac = float(np.sum(np.log(v_new) + np.log1p(-v_new)
                                             - np.log(b) - np.log1p(-b)))
                    else:
                        center = np.log(m_c)
                        up_new = center + ratio * (st.uc - center)
                        v_new = np.exp(up_new)
                        h_new = _gamma_lp_mode(v_new, m_c, phi_new)
                        h_old = hc
                        f_new = interior_f(a, b, v_new)
                        dpjac = float(np.sum(up_new - st.uc))
                    lbeta_new = _beta_lp_mode(y_int, f_new, phi_m)
                    delta = float(np.sum(h_new) - np.sum(h_old)) \
                        + float(np.sum(lbeta_new) - np.sum(lbeta)) + dpjac \
                        + n * math.log(ratio) \
                        + float(truncated_exp_log_pdf(phi_new, lam) - truncated_exp_log_pdf(phi_old, lam)) \
                        + math.log(phi_new * (1.0 - phi_new)) - math.log(phi_old * (1.0 - phi_old))
                    acc_prob = math.exp(min(0.0, delta)) if np.isfinite(delta) else 0.0
                    if np.isfinite(delta) and np.log(rng.uniform()) < delta:
                        st.u_phi[j] = u_new
                        f_int, lbeta = f_new, lbeta_new
                        if tag == "a":
                            phi_a, ha, a = phi_new, h_new, v_new
                            st.ua = up_new
                        elif tag == "b":
                            phi_b, hb, b = phi_new, h_new, v_new
                            st.ub = up_new
                        else:
                            phi_c, hc, c = phi_new, h_new, v_new
                            st.uc = up_new
                        if not warm:
                            accept_counts[bi] += 1
                    if warm:
                        log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
                    else:
                        post_counts[bi] += 1
                    bi += 1

            # --- mixture weight theta ----------------------------------
            u_new = st.u_mix[0] + math.exp(log_scales[bi]) * rng.standard_normal()
            th_new = float(expit(u_new))
            delta = (n0 + n1) * (math.log(th_new) - math.log(theta)) \
                + n_int * (math.log1p(-th_new) - math.log1p(-theta)) \
                + math.log(th_new * (1.0 - th_new)) - math.log(theta * (1.0 - theta))
            acc_prob = math.exp(min(0.0, delta))
            if np.log(rng.uniform()) < delta:
                st.u_mix[0], theta = u_new, th_new
                if not warm:
                    accept_counts[bi] += 1
            if warm:
                log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
            else:
                post_counts[bi] += 1
            bi += 1

            # --- boundary success probability p ------------------------
            u_new = st.u_mix[1] + math.exp(log_scales[bi]) * rng.standard_normal()
            p_new = float(expit(u_new))
            delta = n1 * (math.log(p_new) - math.log(p)) \
                + n0 * (math.log1p(-p_new) - math.log1p(-p)) \
                + math.log(p_new * (1.0 - p_new)) - math.log(p * (1.0 - p))
            acc_prob = math.exp(min(0.0, delta))
            if np.log(rng.uniform()) < delta:
                st.u_mix[1], p = u_new, p_new
                if not warm:
                    accept_counts[bi] += 1
            if warm:
                log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
            else:
                post_counts[bi] += 1
            bi += 1

            # --- observation spread phi_m ------------------------------
            u_new = st.u_mix[2] + math.exp(log_scales[bi]) * rng.standard_normal()
            pm_new = float(expit(u_new))
            lbeta_new = _beta_lp_mode(y_int, f_int, pm_new)
            delta = float(np.sum(lbeta_new) - np.sum(lbeta)) \
                + float(truncated_exp_log_pdf(pm_new, hyper.lambda_m)
                        - truncated_exp_log_pdf(phi_m, hyper.lambda_m)) \
                + math.log(pm_new * (1.0 - pm_new)) - math.log(phi_m * (1.0 - phi_m))
            acc_prob = math.exp(min(0.0, delta)) if np.isfinite(delta) else 0.0
            if np.log(rng.uniform()) < delta:
                st.u_mix[2], phi_m, lbeta = u_new, pm_new, lbeta_new
                if not warm:
                    accept_counts[bi] += 1
            if warm:
                log_scales[bi] = adapt_log_scale(log_scales[bi], acc_prob, it, config.target_accept)
            else:
                post_counts[bi] += 1
            bi += 1

            # --- all patient triples in parallel -----------------------
            ua_new = st.ua + patient_scales * rng.standard_normal(n)
            ub_new = st.ub + patient_scales * rng.standard_normal(n)
            uc_new = st.uc + patient_scales * rng.standard_normal(n)
            a_new = expit(ua_new)
            b_new = expit(ub_new)
            c_new = np.exp(uc_new)
            ha_new = _beta_lp_mode(a_new, m_a, phi_a)
            hb_new = _beta_lp_mode(b_new, m_b, phi_b)
            hc_new = _gamma_lp_mode(c_new, m_c, phi_c)
            f_new = interior_f(a_new, b_new, c_new)
            lbeta_new = _beta_lp_mode(y_int, f_new, phi_m)
            dlik = np.bincount(idx_int, weights=lbeta_new - lbeta, minlength=n)
            djac = (np.log(a_new) + np.log1p(-a_new) + np.log(b_new) + np.log1p(-b_new) + uc_new) \
                - (np.log(a) + np.log1p(-a) + np.log(b) + np.log1p(-b) + st.uc)
            delta_p = (ha_new - ha) + (hb_new - hb) + (hc_new - hc) + dlik + djac
            delta_p = np.where(np.isfinite(delta_p), delta_p, -np.inf)
            accept = np.log(rng.uniform(size=n)) < delta_p
            if np.any(accept):
                st.ua[accept] = ua_new[accept]
                st.ub[accept] = ub_new[accept]
                st.uc[accept] = uc_new[accept]
                a[accept] = a_new[accept]
                b[accept] = b_new[accept]
                c[accept] = c_new[accept]
                ha[accept] = ha_new[accept]
                hb[accept] = hb_new[accept]
                hc[accept] = hc_new[accept]
                obs_mask = accept[idx_int]
                f_int[obs_mask] = f_new[obs_mask]
                lbeta[obs_mask] = lbeta_new[obs_mask]
            if warm:
                gamma = (it + 1.0) ** -0.6
                acc_probs = np.exp(np.minimum(0.0, delta_p))
                patient_scales = np.exp(np.log(patient_scales)
                                        + gamma * (acc_probs - config.target_accept))
            else:
                accept_counts[pat_block] += float(np.mean(accept))
                post_counts[pat_block] += 1

            if not warm and (it - config.n_warmup) % config.thinning == 0 and stored < config.n_keep:
                row = list(st.b_a) + list(st.b_b) + list(st.b_c)
                if not fixed:
                    row += [phi_a, phi_b, phi_c]
                row += [theta, p, phi_m]
                if store_patient_params:
                    row += list(a) + list(b) + list(c)
                kept[chain, stored] = row
                stored += 1

    acceptance = {block_names[j]: float(accept_counts[j] / max(post_counts[j], 1))
                  for j in range(n_blocks)}
    warnings = [f"{name}: zero post-warmup acceptance"
                for name, rate in acceptance.items() if rate == 0.0]
    draws = {name: kept[:, :, j] for j, name in enumerate(all_names)}
    return PosteriorSamples(draws=draws, acceptance=acceptance, warnings=warnings)


def shared_from_draws(samples: PosteriorSamples, k: int, hyper: Hyperparameters) -> dict[str, np.ndarray]:
    """Pool shared-parameter draws into flat arrays; coefficient vectors get
    shape (n_draws, k).  Fixed spreads are filled from the hyperparameters."""
    out: dict[str, np.ndarray] = {}
    for tag in ("b_a", "b_b", "b_c"):
        if k > 1:
            cols = [samples.pooled(f"{tag}[{j}]") for j in range(k)]
            out[tag] = np.stack(cols, axis=1)
        else:
            out[tag] = samples.pooled(tag)[:, None]
    n_draws = out["b_a"].shape[0]
    for name, fx in (("phi_a", hyper.phi_a), ("phi_b", hyper.phi_b), ("phi_c", hyper.phi_c)):
        out[name] = samples.pooled(name) if name in samples.draws else np.full(n_draws, fx)
    for name in ("theta", "p", "phi_m"):
        out[name] = samples.pooled(name)
    return out


def posterior_predictive_shapes(samples: PosteriorSamples, hyper: Hyperparameters,
                                x: np.ndarray, rng: np.random.Generator,
                                n_draws: int | None = None):
    """Draw (a, b, c) for a new patient with covariates x: shared draw from
    the posterior, then one conditional draw per family."""
    x = np.asarray(x, dtype=float).reshape(-1)
    shared = shared_from_draws(samples, len(x), hyper)
    total = shared["theta"].shape[0]
    if n_draws is None or n_draws >= total:
        sel = np.arange(total)
    else:
        sel = rng.choice(total, size=n_draws, replace=False)
    z_a, z_b, z_c = bias_terms(hyper)
    m_a = expit(z_a + shared["b_a"][sel] @ x)
    m_b = expit(z_b + shared["b_b"][sel] @ x)
    m_c = np.exp(z_c + shared["b_c"][sel] @ x)
    s_a = 1.0 / shared["phi_a"][sel] - 1.0
    s_b = 1.0 / shared["phi_b"][sel] - 1.0
    a = rng.beta(1.0 + s_a * m_a, 1.0 + s_a * (1.0 - m_a))
    b = rng.beta(1.0 + s_b * m_b, 1.0 + s_b * (1.0 - m_b))
    alpha_c = 1.0 / shared["phi_c"][sel]
    c = rng.gamma(alpha_c, m_c / (alpha_c - 1.0))
    return a, b, c, sel


def posterior_predictive_curves(samples: PosteriorSamples, hyper: Hyperparameters,
                                x, s: float, times, rng: np.random.Generator,
                                n_draws: int | None = None,
                                observation_noise: bool = False) -> np.ndarray:
    """Matrix of curve draws f(t), one row per posterior draw.

    With observation_noise=True each value additionally passes through the
    mixture observation layer.
    """
    times = np.asarray(times, dtype=float)
    a, b, c, sel = posterior_predictive_shapes(samples, hyper, x, rng, n_draws)
    g = (1.0 - a[:, None]) * (1.0 - b[:, None] * np.exp(-times[None, :] / c[:, None]))
    f = s * np.where(times[None, :] == 0.0, 1.0, g)
    if observation_noise:
        shared = shared_from_draws(samples, np.asarray(x).size, hyper)
        theta = shared["theta"][sel][:, None]
        p = shared["p"][sel][:, None]
        phi_m = shared["phi_m"][sel][:, None]
        is_bern = rng.uniform(size=f.shape) < theta
        bern = (rng.uniform(size=f.shape) < p).astype(float)
        fm = clamp_mode(f)
        sm = 1.0 / phi_m - 1.0
        beta_draw = rng.beta(1.0 + sm * fm, 1.0 + sm * (1.0 - fm))
        f = np.where(is_bern, bern, beta_draw)
    return f


def posterior_median_curve(samples: PosteriorSamples, hyper: Hyperparameters,
                           x, s: float, times, rng: np.random.Generator,
                           qs=(0.1, 0.25, 0.5, 0.75, 0.9),
                           n_draws: int | None = None) -> dict[float, np.ndarray]:
    """Per-time quantiles of the posterior-predictive curve distribution."""
    curves = posterior_predictive_curves(samples, hyper, x, s, times, rng, n_draws)
    return {float(q): np.quantile(curves, q, axis=0) for q in qs}
