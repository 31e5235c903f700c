"""Parameterized covariance kernels and Gram-matrix assembly.

Supported kinds:

* ``se``       k = b1^2 exp(-r^2 / (2 b2^2)),              b1, b2 > 0
* ``periodic`` k = b1^2 exp(-(2/b2^2) sin^2(pi r / b3) - r^2 / b4^2),
               all four parameters > 0
* ``rq``       k = b1^2 (1 + r^2 / (2 b2 b3^2))^(-b3),     b1, b2, b3 > 0
* ``affine``   k = b1 + b2 <x, x'>,                        b1, b2 >= 0
* ``sum``      sum of child kernels; beta is the concatenation of the
               children's parameter vectors

with r = ||x - x'||. The affine kernel is the covariance obtained by
marginalizing a zero-mean Gaussian prior over the coefficients of an
affine mean, which is why negative off-diagonal values are legal while
the Gram matrix stays PSD.

Pairwise fills are dispatched to a numba-jitted backend when available;
set GPHCRB_NO_NUMBA=1 to force the pure-numpy fallback (the benchmark in
``benchmarks/`` compares the two).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._points import as_points
from .errors import InvalidBeta

_ENV_FLAG = "GPHCRB_NO_NUMBA"


def _load_backend():
    if os.environ.get(_ENV_FLAG, "").strip() not in ("", "0"):
        from . import _kernels_numpy as impl

        return impl, "numpy"
    try:
        from . import _kernels_numba as impl

        return impl, "numba"
    except ImportError:
        from . import _kernels_numpy as impl

        return impl, "numpy"


_impl, BACKEND = _load_backend()

KERNEL_ARITY = {"se": 2, "periodic": 4, "rq": 3, "affine": 2}


@dataclass(frozen=True)
class KernelSpec:
    """A covariance kernel kind with its parameter vector.

    For ``sum`` kernels, ``beta`` is derived from the children and the
    constructor ignores any value passed for it.
    """

    kind: str
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    children: tuple = ()

    def __post_init__(self):
        if self.kind == "sum":
            if not self.children:
                raise InvalidBeta("sum kernel needs at least one child")
            children = tuple(self.children)
            object.__setattr__(self, "children", children)
            object.__setattr__(
                self, "beta", np.concatenate([c.beta for c in children])
            )
            return
        if self.kind not in KERNEL_ARITY:
            raise InvalidBeta(f"unknown kernel kind '{self.kind}'")
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        arity = KERNEL_ARITY[self.kind]
        if beta.size != arity:
            raise InvalidBeta(
                f"kernel '{self.kind}' takes {arity} parameter(s), got {beta.size}"
            )
        if not np.all(np.isfinite(beta)):
            raise InvalidBeta("kernel parameters must be finite")
        if self.kind == "affine":
            if np.any(beta < 0):
                raise InvalidBeta("affine kernel parameters must be >= 0")
        elif np.any(beta <= 0):
            raise InvalidBeta(f"kernel '{self.kind}' parameters must be > 0")
        object.__setattr__(self, "beta", beta)

    @property
    def n_params(self) -> int:
        return self.beta.size

    def with_beta(self, beta: np.ndarray) -> "KernelSpec":
        """Rebuild the spec with a new parameter vector (split over children)."""
        beta = np.asarray(beta, dtype=float)
        if beta.size != self.n_params:
            raise InvalidBeta(
                f"expected {self.n_params} parameters, got {beta.size}"
            )
        if self.kind != "sum":
            return KernelSpec(self.kind, beta)
        parts = []
        at = 0
        for child in self.children:
            parts.append(child.with_beta(beta[at : at + child.n_params]))
            at += child.n_params
        return KernelSpec("sum", children=tuple(parts))

    def to_json(self) -> dict:
        if self.kind == "sum":
            return {"kind": "sum", "children": [c.to_json() for c in self.children]}
        return {"kind": self.kind, "beta": self.beta.tolist()}

    @staticmethod
    def from_json(obj: dict) -> "KernelSpec":
        if obj["kind"] == "sum":
            return KernelSpec(
                "sum",
                children=tuple(KernelSpec.from_json(c) for c in obj["children"]),
            )
        return KernelSpec(obj["kind"], np.asarray(obj["beta"], dtype=float))


@dataclass(frozen=True)
class GramBundle:
    """Kernel matrices for a training set and a batch of test points.

    dK stacks the exact derivative of ``kmat`` with respect to each
    kernel parameter, in spec order; None unless derivatives were
    requested.
    """

    kmat: np.ndarray  # (N, N)
    kstar: np.ndarray  # (T, N)
    kss: np.ndarray  # (T,)
    dK: Optional[np.ndarray]  # (q, N, N) or None


def _pairs(spec: KernelSpec, X: np.ndarray, Y: np.ndarray, with_der: bool):
    """Recursive pairwise assembly; returns (K, dK-stack)."""
    b = spec.beta
    if spec.kind == "se":
        return _impl.se_fill(X, Y, b[0], b[1], with_der)
    if spec.kind == "periodic":
        return _impl.periodic_fill(X, Y, b[0], b[1], b[2], b[3], with_der)
    if spec.kind == "rq":
        return _impl.rq_fill(X, Y, b[0], b[1], b[2], with_der)
    if spec.kind == "affine":
        return _impl.affine_fill(X, Y, b[0], b[1], with_der)
    # sum
    ktot = None
    dparts = []
    for child in spec.children:
        k, dk = _pairs(child, X, Y, with_der)
        ktot = k if ktot is None else ktot + k
        dparts.append(dk)
    dtot = np.concatenate(dparts, axis=0) if with_der else dparts[0]
    return ktot, dtot


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    """Evaluate k_beta(x, x') for a single pair of points."""
    X = as_points(x)
    Y = as_points(x2)
    k, _ = _pairs(spec, X, Y, False)
    return float(k[0, 0])


def gram(spec: KernelSpec, xs, xstars=None, with_derivatives: bool = False) -> GramBundle:
    """Assemble K, the cross-vectors k_star, k_starstar, and optionally dK/dbeta.

    Parameters
    ----------
    spec : KernelSpec
    xs : array-like
        Training points, (N, d) after coercion; N >= 1.
    xstars : array-like, optional
        Test points; omit for an empty test batch.
    with_derivatives : bool
        Populate ``dK`` with the closed-form partials of the training
        Gram matrix.

    Returns
    -------
    GramBundle
    """
    X = as_points(xs)
    if X.shape[0] < 1:
        raise ValueError("gram needs at least one training point")
    kmat, dk = _pairs(spec, X, X, with_derivatives)
    if xstars is None or np.size(xstars) == 0:
        kstar = np.zeros((0, X.shape[0]))
        kss = np.zeros(0)
    else:
        Xs = as_points(xstars)
        kstar, _ = _pairs(spec, Xs, X, False)
        kself, _ = _pairs(spec, Xs, Xs, False)
        kss = np.ascontiguousarray(np.diag(kself))
    return GramBundle(
        kmat=kmat,
        kstar=kstar,
        kss=kss,
        dK=dk if with_derivatives else None,
    )


def warmup() -> None:
    """Trigger backend compilation on tiny inputs (no-op for numpy)."""
    X = np.zeros((2, 1))
    Y = np.ones((1, 1))
    for flag in (False, True):
        _impl.se_fill(X, Y, 1.0, 1.0, flag)
        _impl.periodic_fill(X, Y, 1.0, 1.0, 1.0, 1.0, flag)
        _impl.rq_fill(X, Y, 1.0, 1.0, 1.0, flag)
        _impl.affine_fill(X, Y, 1.0, 1.0, flag)
