"""Mean-square-error bounds on GP prediction after hyperparameter learning.

Two bounds per test point:

* bcrb -- the predictive variance k_ss - k_star' (K + s2 I)^-1 k_star,
  the minimum MSE when all hyperparameters are known.
* hcrb -- bcrb plus the gap g' M^-1 g that accounts for the mean
  parameters having to be learned from the same data, with

      g = d/dalpha (m_star - m' rho),    rho = (K + s2 I)^-1 k_star
      M = (dm/dalpha)' (K + s2 I)^-1 (dm/dalpha).

Because rho does not depend on alpha, g reduces exactly to
u_grad(x_star) - J' rho where J stacks the mean Jacobian at the training
points; g is always computed from the analytic Jacobians, never by
differencing the predictor.

The module also exposes the full Fisher information over (alpha, beta,
sigma2), assembled entrywise from the Gaussian Fisher formula for
parameterized mean and covariance, and two self-check oracles: an
(N+1)-dimensional identity relating the joint-moment form of the
alpha-information to M, and an alternative route to the hcrb through
that joint form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NoMeanParameters, NumericalError, SingularM
from .gp import Dataset, GpModel, JointMoments, joint_moments, posterior
from .kernels import gram
from .means import mean_eval

# Above this condition number, M is treated as singular: the mean
# parameters are not identifiable at this design and the bound is
# undefined rather than silently regularized.
M_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class HcrbIngredients:
    """Everything entering the hybrid bound at one test point."""

    g: np.ndarray  # (p,)
    mmat: np.ndarray  # (p, p)
    gap: float  # g' M^-1 g
    bcrb: float  # predictive variance
    hcrb: float  # bcrb + gap
    fhat: float  # plug-in prediction, for reports


def _solve_spd_small(mat: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    if np.linalg.cond(mat) > M_CONDITION_LIMIT:
        raise SingularM(
            f"{what} has condition number above {M_CONDITION_LIMIT:g}; "
            "mean parameters are not identifiable at this design"
        )
    return np.linalg.solve(mat, rhs)


def hcrb(model: GpModel, data: Dataset, xstars) -> list[HcrbIngredients]:
    """Hybrid and Bayesian bounds at each test point.

    Raises
    ------
    NoMeanParameters
        For zero-parameter means; callers that only need the predictive
        variance should fall back to :func:`gphcrb.gp.predict`.
    SingularM
        When M is numerically singular.
    """
    p = model.mean.n_params
    if p < 1:
        raise NoMeanParameters(
            "hybrid bound needs at least one mean parameter; "
            "use the predictive variance alone for fixed means"
        )
    post = posterior(model, data, xstars)
    jac = mean_eval(model.mean, data.xs).jac  # (N, p)
    ugrad = mean_eval(model.mean, xstars).jac  # (T, p)
    w = linalg.solve(post.chol, jac)  # Sigma_y^-1 J
    mmat = jac.T @ w
    fhat = post.mstar + post.kstar @ post.alpha_solve
    var = post.kss - np.einsum("tn,nt->t", post.kstar, post.rho)
    out = []
    for t in range(post.kss.size):
        g = ugrad[t] - jac.T @ post.rho[:, t]
        gap = float(g @ _solve_spd_small(mmat, g, "M"))
        bcrb = max(float(var[t]), 0.0)
        out.append(
            HcrbIngredients(
                g=g,
                mmat=mmat,
                gap=gap,
                bcrb=bcrb,
                hcrb=bcrb + gap,
                fhat=float(fhat[t]),
            )
        )
    return out


def bound_report(model: GpModel, data: Dataset, xstars) -> dict:
    """Per-test-point report arrays, the payload of the bound CSV."""
    items = hcrb(model, data, xstars)
    xs = np.atleast_1d(np.asarray(xstars, dtype=float)).reshape(len(items), -1)[:, 0]
    return {
        "x": xs,
        "fhat": np.array([it.fhat for it in items]),
        "bcrb": np.array([it.bcrb for it in items]),
        "hcrb": np.array([it.hcrb for it in items]),
        "gap": np.array([it.gap for it in items]),
    }


@dataclass(frozen=True)
class FisherBlocks:
    """Fisher information of the training distribution plus the blocks
    coupling it to f_star in the hybrid information matrix."""

    f_theta: np.ndarray  # (p+q+1, p+q+1) over (alpha, beta, sigma2)
    f_cross: np.ndarray  # (p+q+1,), equals [-g / bcrb, 0, ..., 0]
    j_star: float  # 1 / bcrb


def fisher_information(model: GpModel, data: Dataset, xstar) -> FisherBlocks:
    """Assemble the Fisher information entrywise.

    For Gaussian data with mean m(alpha) and covariance S(beta, sigma2),

        F_ij = dm'/dtheta_i S^-1 dm/dtheta_j
               + 1/2 tr(S^-1 dS/dtheta_i S^-1 dS/dtheta_j).

    Mean derivatives vanish for (beta, sigma2) entries and covariance
    derivatives vanish for alpha entries, so F is block-diagonal between
    alpha and (beta, sigma2); the cross block is exactly zero by
    construction, not by numerical cancellation.
    """
    p = model.mean.n_params
    q = model.kernel.n_params
    n = data.n
    bundle = gram(model.kernel, data.xs, None, with_derivatives=True)
    f = linalg.cholesky(bundle.kmat + model.theta.sigma2 * np.eye(n))
    jac = mean_eval(model.mean, data.xs).jac
    sinv = linalg.inv(f)

    f_theta = np.zeros((p + q + 1, p + q + 1))
    if p:
        f_theta[:p, :p] = jac.T @ linalg.solve(f, jac)
    # covariance derivatives: dK/dbeta_i, then dS/dsigma2 = I
    a_mats = [sinv @ bundle.dK[i] for i in range(q)] + [sinv]
    for i in range(q + 1):
        for j in range(i, q + 1):
            val = 0.5 * float(np.einsum("ij,ji->", a_mats[i], a_mats[j]))
            f_theta[p + i, p + j] = val
            f_theta[p + j, p + i] = val

    ing = hcrb(model, data, xstar)[0] if p >= 1 else None
    if ing is None:
        raise NoMeanParameters("fisher cross block needs mean parameters")
    if ing.bcrb <= 0:
        raise NumericalError("predictive variance vanished; cross block undefined")
    f_cross = np.zeros(p + q + 1)
    f_cross[:p] = -ing.g / ing.bcrb
    return FisherBlocks(f_theta=f_theta, f_cross=f_cross, j_star=1.0 / ing.bcrb)


def _joint_alpha_information(model: GpModel, data: Dataset, xstar):
    """D' Sigma_bar^-1 D where D stacks the mean Jacobian at the training
    points and the test point; shared by the identity check and the
    alternative bound route."""
    jm: JointMoments = joint_moments(model, data, xstar)
    dbar = np.vstack(
        [mean_eval(model.mean, data.xs).jac, mean_eval(model.mean, xstar).jac]
    )
    fbar = linalg.cholesky(jm.sigma_bar)
    return dbar.T @ linalg.solve(fbar, dbar)


def check_appendix_b_identity(model: GpModel, data: Dataset, xstar) -> float:
    """Residual of the identity
    D_bar' Sigma_bar^-1 D_bar - g g' / bcrb == M.

    The left side goes through the (N+1)-dimensional joint moments, the
    right side through the training-only factorization, so agreement is
    a real cross-check of both code paths. Returns the max-norm residual;
    values <= 1e-8 * (1 + ||M||) are expected for healthy instances.
    """
    ing = hcrb(model, data, xstar)[0]
    lhs = _joint_alpha_information(model, data, xstar) - np.outer(ing.g, ing.g) / ing.bcrb
    return float(np.max(np.abs(lhs - ing.mmat)))


def hcrb_via_eq8(model: GpModel, data: Dataset, xstar) -> float:
    """The hybrid bound computed through the joint-moment expression

        bcrb + g' (D_bar' Sigma_bar^-1 D_bar - g g' / bcrb)^-1 g

    i.e. without reducing the inner matrix to M first. Used only as a
    cross-check oracle against :func:`hcrb`.
    """
    ing = hcrb(model, data, xstar)[0]
    inner = _joint_alpha_information(model, data, xstar) - np.outer(ing.g, ing.g) / ing.bcrb
    gap = float(ing.g @ _solve_spd_small(inner, ing.g, "joint alpha information"))
    return ing.bcrb + gap
