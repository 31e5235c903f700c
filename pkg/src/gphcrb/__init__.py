"""Gaussian-process regression with hybrid Cramér-Rao prediction bounds.

The predictive variance of a GP is the minimum prediction MSE only when
the hyperparameters are known. This package computes, next to that
variance (the Bayesian bound), the hybrid bound that also charges for
learning the mean parameters from the data, and ships a Monte-Carlo
harness plus a CO2 case study exercising both.
"""

from . import bounds, co2, experiments, kernels, learning, linalg, means
from .bounds import FisherBlocks, HcrbIngredients, bound_report, check_appendix_b_identity, fisher_information, hcrb, hcrb_via_eq8
from .gp import (
    Dataset,
    GpModel,
    Hyperparameters,
    JointMoments,
    PosteriorFactor,
    Prediction,
    joint_moments,
    log_marginal_likelihood,
    posterior,
    predict,
    sample_realization,
)
from .kernels import BACKEND, GramBundle, KernelSpec, gram, kernel_eval
from .learning import FitConfig, FitResult, fit_ml, transform, untransform
from .means import MeanJacobian, MeanSpec, basis_of_linear_mean, mean_eval

__all__ = [
    "BACKEND",
    "Dataset",
    "FisherBlocks",
    "FitConfig",
    "FitResult",
    "GpModel",
    "GramBundle",
    "HcrbIngredients",
    "Hyperparameters",
    "JointMoments",
    "KernelSpec",
    "MeanJacobian",
    "MeanSpec",
    "PosteriorFactor",
    "Prediction",
    "basis_of_linear_mean",
    "bound_report",
    "bounds",
    "check_appendix_b_identity",
    "co2",
    "experiments",
    "fisher_information",
    "fit_ml",
    "gram",
    "hcrb",
    "hcrb_via_eq8",
    "joint_moments",
    "kernel_eval",
    "kernels",
    "learning",
    "linalg",
    "log_marginal_likelihood",
    "mean_eval",
    "means",
    "posterior",
    "predict",
    "sample_realization",
    "transform",
    "untransform",
]

__version__ = "0.1.0"
