"""Parameterized mean functions with exact analytic gradients.

The hybrid bound needs the exact Jacobian d m(x) / d alpha, so each
built-in kind carries closed-form partials and user extensions must
supply a gradient callable alongside the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._points import as_points
from .errors import InvalidTheta, NotLinearInParameters, UnsupportedDimension

# Number of alpha parameters per built-in kind.
MEAN_ARITY = {"zero": 0, "constant": 1, "linear": 1, "affine": 2, "sinusoid": 3}

# Kinds of the form m(x) = alpha . u(x), with their basis u.
_LINEAR_BASES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "constant": lambda x: np.ones((x.shape[0], 1)),
    "linear": lambda x: x[:, :1].copy(),
    "affine": lambda x: np.hstack([np.ones((x.shape[0], 1)), x[:, :1]]),
}


@dataclass(frozen=True)
class MeanSpec:
    """A mean function kind together with its parameter vector.

    ``kind`` is one of zero/constant/linear/affine/sinusoid, or "custom"
    with ``value``/``grad`` callables mapping an (N, d) point array to an
    (N,) value vector and an (N, p) Jacobian.
    """

    kind: str
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    value: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    grad: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        if self.kind in MEAN_ARITY:
            arity = MEAN_ARITY[self.kind]
            if self.alpha.size != arity:
                raise InvalidTheta(
                    f"mean kind '{self.kind}' takes {arity} parameter(s), "
                    f"got {self.alpha.size}"
                )
            if not np.all(np.isfinite(self.alpha)):
                raise InvalidTheta("mean parameters must be finite")
        elif self.kind == "custom":
            if self.value is None or self.grad is None:
                raise InvalidTheta("custom mean needs value and grad callables")
        else:
            raise InvalidTheta(f"unknown mean kind '{self.kind}'")

    @property
    def n_params(self) -> int:
        if self.kind == "custom":
            return self.alpha.size
        return MEAN_ARITY[self.kind]

    def with_alpha(self, alpha: np.ndarray) -> "MeanSpec":
        return MeanSpec(self.kind, alpha, self.value, self.grad)

    def to_json(self) -> dict:
        if self.kind == "custom":
            raise NotLinearInParameters("custom means are not JSON-serializable")
        return {"kind": self.kind, "alpha": self.alpha.tolist()}

    @staticmethod
    def from_json(obj: dict) -> "MeanSpec":
        return MeanSpec(kind=obj["kind"], alpha=np.asarray(obj.get("alpha", []), dtype=float))


@dataclass(frozen=True)
class MeanJacobian:
    """Mean values and the exact Jacobian with respect to alpha."""

    values: np.ndarray  # (N,)
    jac: np.ndarray  # (N, p)


def _check_dim(xs: np.ndarray, kind: str) -> np.ndarray:
    if xs.shape[1] != 1:
        raise UnsupportedDimension(
            f"built-in mean '{kind}' is defined for d=1 inputs, got d={xs.shape[1]}"
        )
    return xs[:, 0]


def mean_eval(spec: MeanSpec, xs) -> MeanJacobian:
    """Evaluate m_alpha and d m / d alpha over a point set.

    Parameters
    ----------
    spec : MeanSpec
    xs : array-like
        Points, coerced to an (N, d) array; built-ins require d = 1.

    Returns
    -------
    MeanJacobian
        values[i] = m(x_i) and jac[i, j] = d m(x_i) / d alpha_j.
    """
    pts = as_points(xs)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("mean_eval needs at least one point")
    a = spec.alpha

    if spec.kind == "custom":
        values = np.asarray(spec.value(pts, a), dtype=float).reshape(n)
        jac = np.asarray(spec.grad(pts, a), dtype=float).reshape(n, a.size)
        return MeanJacobian(values=values, jac=jac)
    if spec.kind == "zero":
        return MeanJacobian(values=np.zeros(n), jac=np.zeros((n, 0)))
    if spec.kind in _LINEAR_BASES:
        x = _check_dim(pts, spec.kind)
        basis = _LINEAR_BASES[spec.kind](pts)
        return MeanJacobian(values=basis @ a, jac=basis)
    # sinusoid: m = a1 sin(a2 x + a3)
    x = _check_dim(pts, spec.kind)
    phase = a[1] * x + a[2]
    s, c = np.sin(phase), np.cos(phase)
    jac = np.column_stack([s, a[0] * x * c, a[0] * c])
    return MeanJacobian(values=a[0] * s, jac=jac)


def basis_of_linear_mean(spec: MeanSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Return the basis u with m_alpha(x) = alpha . u(x), when one exists.

    Only constant/linear/affine kinds are linear in their parameters.
    The returned callable maps points to an (N, p) basis matrix.
    """
    if spec.kind not in _LINEAR_BASES:
        raise NotLinearInParameters(
            f"mean kind '{spec.kind}' is not of the form alpha . u(x)"
        )
    base = _LINEAR_BASES[spec.kind]

    def u(xs) -> np.ndarray:
        pts = as_points(xs)
        _check_dim(pts, spec.kind)
        return base(pts)

    return u
