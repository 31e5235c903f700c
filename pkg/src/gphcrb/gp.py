"""Gaussian-process model core.

Binds a mean function, a covariance kernel, and hyperparameters; computes
the plug-in predictor, predictive variance, joint moments of (y, f_star),
the log marginal likelihood with analytic gradients, and GP realizations.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import linalg
from ._points import as_points
from .errors import DimensionMismatch, InvalidTheta, NotPositiveDefinite
from .kernels import GramBundle, KernelSpec, gram
from .means import MeanSpec, mean_eval

LOG_2PI = float(np.log(2.0 * np.pi))

# Predictive variances in [-VAR_CLAMP_TOL, 0) are rounding noise and are
# clamped to zero; anything more negative signals numerical breakdown.
VAR_CLAMP_TOL = 1e-10


@dataclass(frozen=True)
class Hyperparameters:
    """The stacked parameter vector: mean alpha, kernel beta, noise sigma2.

    sigma2 = 0 is allowed for noise-free prediction; learning requires a
    strictly positive value.
    """

    alpha: np.ndarray
    beta: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        if self.alpha.size == 0:
            object.__setattr__(self, "alpha", np.zeros(0))
        if not np.isfinite(self.sigma2) or self.sigma2 < 0:
            raise InvalidTheta(f"sigma2 must be >= 0 and finite, got {self.sigma2}")

    @property
    def vector(self) -> np.ndarray:
        """Flat (alpha..., beta..., sigma2) layout used throughout."""
        return np.concatenate([self.alpha, self.beta, [self.sigma2]])

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "sigma2": self.sigma2,
        }

    @staticmethod
    def from_json(obj: dict) -> "Hyperparameters":
        return Hyperparameters(
            alpha=np.asarray(obj.get("alpha", []), dtype=float),
            beta=np.asarray(obj.get("beta", []), dtype=float),
            sigma2=float(obj["sigma2"]),
        )


@dataclass(frozen=True)
class Dataset:
    """Training inputs and scalar targets."""

    xs: np.ndarray  # (N, d)
    ys: np.ndarray  # (N,)

    def __post_init__(self):
        object.__setattr__(self, "xs", as_points(self.xs))
        object.__setattr__(self, "ys", np.atleast_1d(np.asarray(self.ys, dtype=float)))
        if self.xs.shape[0] != self.ys.shape[0]:
            raise DimensionMismatch(
                f"{self.xs.shape[0]} inputs vs {self.ys.shape[0]} targets"
            )
        if self.xs.shape[0] < 1:
            raise ValueError("dataset needs at least one point")
        if not (np.all(np.isfinite(self.xs)) and np.all(np.isfinite(self.ys))):
            raise ValueError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in zip(self.xs[:, 0], self.ys):
            w.writerow([f"{x:.17g}", f"{y:.17g}"])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "Dataset":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0][:2]] != ["x", "y"]:
            raise ValueError("dataset CSV must start with header 'x,y'")
        xs = [float(r[0]) for r in rows[1:] if r]
        ys = [float(r[1]) for r in rows[1:] if r]
        return Dataset(xs=np.asarray(xs), ys=np.asarray(ys))


@dataclass(frozen=True)
class GpModel:
    """A mean spec, kernel spec, and hyperparameters kept in sync.

    The constructor pushes ``theta``'s alpha/beta into the mean and
    kernel specs, so the three views never disagree.
    """

    mean: MeanSpec
    kernel: KernelSpec
    theta: Hyperparameters

    def __post_init__(self):
        if self.theta.alpha.size != self.mean.n_params:
            raise InvalidTheta(
                f"mean '{self.mean.kind}' takes {self.mean.n_params} parameter(s), "
                f"theta.alpha has {self.theta.alpha.size}"
            )
        if self.theta.beta.size != self.kernel.n_params:
            raise InvalidTheta(
                f"kernel '{self.kernel.kind}' takes {self.kernel.n_params} "
                f"parameter(s), theta.beta has {self.theta.beta.size}"
            )
        object.__setattr__(self, "mean", self.mean.with_alpha(self.theta.alpha))
        object.__setattr__(self, "kernel", self.kernel.with_beta(self.theta.beta))

    def with_theta(self, theta: Hyperparameters) -> "GpModel":
        return GpModel(self.mean, self.kernel, theta)

    def to_json(self) -> dict:
        return {
            "mean": self.mean.to_json(),
            "kernel": self.kernel.to_json(),
            "theta": self.theta.to_json(),
        }

    @staticmethod
    def from_json(obj: dict) -> "GpModel":
        mean = MeanSpec.from_json(obj["mean"])
        kernel = KernelSpec.from_json(obj["kernel"])
        if "theta" in obj:
            theta = Hyperparameters.from_json(obj["theta"])
        else:
            theta = Hyperparameters(mean.alpha, kernel.beta, float(obj["sigma2"]))
        return GpModel(mean, kernel, theta)


@dataclass(frozen=True)
class PosteriorFactor:
    """Cached factorization of K + sigma2 I plus the solves every
    downstream consumer (predictor, bounds, likelihood) reuses.
    """

    chol: linalg.CholFactor
    resid: np.ndarray  # y - m, (N,)
    alpha_solve: np.ndarray  # (K + sigma2 I)^-1 (y - m), (N,)
    kstar: np.ndarray  # (T, N)
    kss: np.ndarray  # (T,)
    rho: np.ndarray  # (N, T), column t = (K + sigma2 I)^-1 kstar_t
    mstar: np.ndarray  # mean values at the test points, (T,)


def posterior(model: GpModel, data: Dataset, xstars=None) -> PosteriorFactor:
    """Factor the training covariance and precompute shared solves."""
    bundle = gram(model.kernel, data.xs, xstars)
    sigma_y = bundle.kmat + model.theta.sigma2 * np.eye(data.n)
    f = linalg.cholesky(sigma_y)
    mvals = mean_eval(model.mean, data.xs).values
    resid = data.ys - mvals
    alpha_solve = linalg.solve(f, resid)
    if bundle.kstar.shape[0]:
        rho = linalg.solve(f, bundle.kstar.T)
        mstar = mean_eval(model.mean, xstars).values
    else:
        rho = np.zeros((data.n, 0))
        mstar = np.zeros(0)
    return PosteriorFactor(
        chol=f,
        resid=resid,
        alpha_solve=alpha_solve,
        kstar=bundle.kstar,
        kss=bundle.kss,
        rho=rho,
        mstar=mstar,
    )


@dataclass(frozen=True)
class Prediction:
    fhat: np.ndarray  # (T,)
    var: np.ndarray  # (T,)


def predict(model: GpModel, data: Dataset, xstars, post: Optional[PosteriorFactor] = None) -> Prediction:
    """Plug-in predictor and predictive variance at each test point.

    fhat = m_star + k_star . (K + sigma2 I)^-1 (y - m)
    var  = k_starstar - k_star . (K + sigma2 I)^-1 k_star

    ``var`` is the minimum MSE when the hyperparameters are known, hence
    also the Bayesian Cramer-Rao bound reported by the bounds module.
    """
    if post is None:
        post = posterior(model, data, xstars)
    fhat = post.mstar + post.kstar @ post.alpha_solve
    var = post.kss - np.einsum("tn,nt->t", post.kstar, post.rho)
    bad = var < -VAR_CLAMP_TOL
    if np.any(bad):
        raise NotPositiveDefinite(
            f"predictive variance {var[bad].min():g} below -{VAR_CLAMP_TOL:g}; "
            "covariance model has broken down"
        )
    clip = var < 0.0
    if np.any(clip):
        warnings.warn("clamping tiny negative predictive variance to 0")
        var = np.where(clip, 0.0, var)
    return Prediction(fhat=fhat, var=var)


@dataclass(frozen=True)
class JointMoments:
    """Mean and covariance of the stacked vector (y, f_star)."""

    mu_bar: np.ndarray  # (N+1,)
    sigma_bar: np.ndarray  # (N+1, N+1)


def joint_moments(model: GpModel, data: Dataset, xstar) -> JointMoments:
    """Exact joint moments of (y, f_star); noise enters the y block only."""
    bundle = gram(model.kernel, data.xs, xstar)
    if bundle.kss.size != 1:
        raise DimensionMismatch("joint_moments takes a single test point")
    n = data.n
    mu = np.empty(n + 1)
    mu[:n] = mean_eval(model.mean, data.xs).values
    mu[n] = mean_eval(model.mean, xstar).values[0]
    sig = np.empty((n + 1, n + 1))
    sig[:n, :n] = bundle.kmat + model.theta.sigma2 * np.eye(n)
    sig[:n, n] = bundle.kstar[0]
    sig[n, :n] = bundle.kstar[0]
    sig[n, n] = bundle.kss[0]
    return JointMoments(mu_bar=mu, sigma_bar=sig)


def log_marginal_likelihood(model: GpModel, data: Dataset):
    """Log marginal likelihood of the targets and its analytic gradient.

    Returns
    -------
    value : float
        -1/2 (y-m)' S^-1 (y-m) - 1/2 log det S - N/2 log 2pi
        with S = K + sigma2 I.
    grad : (p + q + 1,) array
        Partials with respect to (alpha..., beta..., log sigma2); alpha
        and beta entries are in natural coordinates, the noise entry is
        chain-ruled into log sigma2.
    """
    bundle = gram(model.kernel, data.xs, None, with_derivatives=True)
    n = data.n
    sigma2 = model.theta.sigma2
    f = linalg.cholesky(bundle.kmat + sigma2 * np.eye(n))
    mj = mean_eval(model.mean, data.xs)
    resid = data.ys - mj.values
    asolve = linalg.solve(f, resid)
    value = -0.5 * float(resid @ asolve) - 0.5 * linalg.logdet(f) - 0.5 * n * LOG_2PI

    q = model.kernel.n_params
    grad = np.empty(mj.jac.shape[1] + q + 1)
    grad[: mj.jac.shape[1]] = mj.jac.T @ asolve
    sinv = linalg.inv(f)
    at = mj.jac.shape[1]
    for i in range(q):
        dk = bundle.dK[i]
        grad[at + i] = 0.5 * float(asolve @ dk @ asolve) - 0.5 * float(
            np.einsum("ij,ij->", sinv, dk)
        )
    dlml_dsigma2 = 0.5 * float(asolve @ asolve) - 0.5 * float(np.trace(sinv))
    grad[-1] = dlml_dsigma2 * sigma2
    return value, grad


def sample_realization(
    model: GpModel,
    xs_all,
    rng: np.random.Generator,
    with_noise: bool = True,
    noise_indices: Optional[Sequence[int]] = None,
):
    """Draw one GP realization f at the given points, plus noisy targets.

    Noise is added at ``noise_indices`` (all points when None) only when
    ``with_noise`` is set. Identical rng state gives identical draws.

    Returns
    -------
    (f, y) : pair of (n,) arrays
    """
    pts = as_points(xs_all)
    kmat = gram(model.kernel, pts).kmat
    mvals = mean_eval(model.mean, pts).values
    f = linalg.sample_mvn(mvals, linalg.cholesky(kmat), rng)
    y = f.copy()
    if with_noise and model.theta.sigma2 > 0:
        idx = np.arange(pts.shape[0]) if noise_indices is None else np.asarray(noise_indices)
        y[idx] += np.sqrt(model.theta.sigma2) * rng.standard_normal(idx.size)
    return f, y
