"""Maximum-likelihood hyperparameter estimation.

Multi-start quasi-Newton ascent (L-BFGS-B on the negated log marginal
likelihood) in transformed coordinates: mean parameters are free, kernel
parameters and the noise variance live in log space. The marginal
likelihood is multi-modal for periodic kernels and sinusoid means
(frequency aliasing), so single-start fits are unsafe; starts beyond the
first perturb the initial point in transformed space, which makes the
perturbations log-normal for the positive parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.optimize

from .errors import AllStartsFailed, InvalidBeta, InvalidTheta, NotPositiveDefinite
from .gp import Dataset, GpModel, Hyperparameters, log_marginal_likelihood
from .kernels import KernelSpec
from .means import MeanSpec

_FAIL_VALUE = 1e25


@dataclass(frozen=True)
class FitConfig:
    """Optimizer configuration.

    fixed_mask entries (laid out as alpha..., beta..., sigma2) freeze
    parameters at their initial values; None leaves everything free.
    """

    n_starts: int = 5
    max_iters: int = 500
    grad_tol: float = 1e-6
    init_spread: float = 1.0
    fixed_mask: Optional[np.ndarray] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iters < 0:
            raise InvalidTheta("n_starts must be >= 1 and max_iters >= 0")
        if self.grad_tol <= 0 or self.init_spread < 0:
            raise InvalidTheta("grad_tol must be > 0 and init_spread >= 0")
        if self.fixed_mask is not None:
            object.__setattr__(
                self, "fixed_mask", np.asarray(self.fixed_mask, dtype=bool)
            )

    def to_json(self) -> dict:
        out = {
            "n_starts": self.n_starts,
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
            "init_spread": self.init_spread,
            "seed": self.seed,
        }
        if self.fixed_mask is not None:
            out["fixed_mask"] = [bool(b) for b in self.fixed_mask]
        return out

    @staticmethod
    def from_json(obj: dict) -> "FitConfig":
        return FitConfig(
            n_starts=int(obj.get("n_starts", 5)),
            max_iters=int(obj.get("max_iters", 500)),
            grad_tol=float(obj.get("grad_tol", 1e-6)),
            init_spread=float(obj.get("init_spread", 1.0)),
            fixed_mask=obj.get("fixed_mask"),
            seed=int(obj.get("seed", 0)),
        )


@dataclass(frozen=True)
class FitResult:
    theta_hat: Hyperparameters
    lml: float
    grad_norm: float
    converged: bool
    n_restarts_used: int
    start_lmls: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "theta_hat": self.theta_hat.to_json(),
            "lml": self.lml,
            "grad_norm": self.grad_norm,
            "converged": self.converged,
            "n_restarts_used": self.n_restarts_used,
            "start_lmls": list(self.start_lmls),
        }


def transform(theta: Hyperparameters, mean: MeanSpec, kernel: KernelSpec) -> np.ndarray:
    """Map theta to the unconstrained optimizer coordinates.

    alpha stays as-is; beta and sigma2 are logged. Round-trips with
    :func:`untransform` to 1e-12.
    """
    if theta.beta.size and np.any(theta.beta <= 0):
        raise InvalidBeta(
            f"kernel '{kernel.kind}' parameters must be > 0 to enter log space"
        )
    if theta.sigma2 <= 0:
        raise InvalidTheta("sigma2 must be > 0 for learning")
    return np.concatenate([theta.alpha, np.log(theta.beta), [np.log(theta.sigma2)]])


def untransform(t: np.ndarray, mean: MeanSpec, kernel: KernelSpec) -> Hyperparameters:
    """Inverse of :func:`transform`."""
    p = mean.n_params
    q = kernel.n_params
    if t.size != p + q + 1:
        raise InvalidTheta(f"expected {p + q + 1} coordinates, got {t.size}")
    return Hyperparameters(
        alpha=t[:p].copy(),
        beta=np.exp(t[p : p + q]),
        sigma2=float(np.exp(t[-1])),
    )


def _chain_gradient(grad: np.ndarray, theta: Hyperparameters, p: int, q: int) -> np.ndarray:
    """gp-core reports (alpha, beta, log sigma2) partials; convert the
    beta block to log-beta coordinates."""
    out = grad.copy()
    out[p : p + q] *= theta.beta
    return out


def fit_ml(
    mean: MeanSpec,
    kernel: KernelSpec,
    data: Dataset,
    init: Hyperparameters,
    cfg: FitConfig = FitConfig(),
) -> FitResult:
    """Maximize the log marginal likelihood over the free hyperparameters.

    Runs ``cfg.n_starts`` L-BFGS-B ascents (the configured init plus
    perturbed copies) and returns the best terminal point; ties break
    toward the lowest start index so results are reproducible.

    Raises
    ------
    AllStartsFailed
        If every start ends at a non-finite likelihood or dies inside
        the factorization.
    """
    p, q = mean.n_params, kernel.n_params
    t0 = transform(init, mean, kernel)
    mask = cfg.fixed_mask
    if mask is None:
        mask = np.zeros(p + q + 1, dtype=bool)
    if mask.size != p + q + 1:
        raise InvalidTheta(
            f"fixed_mask has {mask.size} entries, model has {p + q + 1} parameters"
        )
    free = ~mask

    def eval_at(tfull: np.ndarray):
        with np.errstate(over="ignore", invalid="ignore"):
            theta = untransform(tfull, mean, kernel)
            value, grad = log_marginal_likelihood(GpModel(mean, kernel, theta), data)
        return value, _chain_gradient(grad, theta, p, q)

    # line searches may step to overflowing or unfactorizable parameters;
    # a huge value with zero gradient makes L-BFGS-B backtrack
    step_failures = (NotPositiveDefinite, InvalidBeta, InvalidTheta)

    def objective(tfree: np.ndarray):
        tfull = t0.copy()
        tfull[free] = tfree
        try:
            value, grad = eval_at(tfull)
        except step_failures:
            return _FAIL_VALUE, np.zeros(tfree.size)
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            return _FAIL_VALUE, np.zeros(tfree.size)
        return -value, -grad[free]

    if not np.any(free):
        value, grad = eval_at(t0)
        return FitResult(
            theta_hat=init,
            lml=value,
            grad_norm=0.0,
            converged=True,
            n_restarts_used=0,
            start_lmls=(value,),
        )

    rng = np.random.default_rng(cfg.seed)
    best = None
    start_lmls = []
    n_ok = 0
    for s in range(cfg.n_starts):
        tfree0 = t0[free].copy()
        if s > 0:
            tfree0 += cfg.init_spread * rng.standard_normal(tfree0.size)
        res = scipy.optimize.minimize(
            objective,
            tfree0,
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": cfg.max_iters,
                "ftol": 1e-14,
                "gtol": cfg.grad_tol,
            },
        )
        tfull = t0.copy()
        tfull[free] = res.x
        try:
            value, grad = eval_at(tfull)
        except step_failures:
            start_lmls.append(float("nan"))
            continue
        if not np.isfinite(value):
            start_lmls.append(float("nan"))
            continue
        n_ok += 1
        start_lmls.append(value)
        gnorm = float(np.max(np.abs(grad[free]))) if free.any() else 0.0
        if best is None or value > best[0]:
            best = (value, tfull, gnorm)
    if best is None:
        raise AllStartsFailed(f"all {cfg.n_starts} starts failed")
    value, tfull, gnorm = best
    theta_hat = untransform(tfull, mean, kernel)
    if mask.any():
        # report fixed entries exactly as given, not exp(log(x))
        vec = theta_hat.vector
        vec[mask] = init.vector[mask]
        theta_hat = Hyperparameters(vec[:p], vec[p : p + q], float(vec[-1]))
    return FitResult(
        theta_hat=theta_hat,
        lml=value,
        grad_norm=gnorm,
        converged=gnorm <= cfg.grad_tol,
        n_restarts_used=n_ok,
        start_lmls=tuple(start_lmls),
    )
