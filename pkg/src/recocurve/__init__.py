"""Bayesian recovery-curve modeling toolkit."""

from .curves import RecoveryCurve, RecoveryShapeParams, eval_curve, eval_shape, fit_shape
from .dists import ModeSpreadBeta, ModeSpreadGamma
from .model import Dataset, Hyperparameters, PatientParams, SharedParams, log_posterior
from .sampler import PosteriorSamples, SamplerConfig, gelman_rubin, run_mcmc

__all__ = [
    "RecoveryCurve",
    "RecoveryShapeParams",
    "eval_curve",
    "eval_shape",
    "fit_shape",
    "ModeSpreadBeta",
    "ModeSpreadGamma",
    "Dataset",
    "Hyperparameters",
    "PatientParams",
    "SharedParams",
    "log_posterior",
    "PosteriorSamples",
    "SamplerConfig",
    "gelman_rubin",
    "run_mcmc",
]

__version__ = "0.1.0"
