"""Dense symmetric positive-(semi)definite linear algebra.

Factorization with a diagonal jitter ladder, triangular solves,
log-determinants, and correlated Gaussian sampling. Every application of
(K + sigma^2 I)^-1 in the package is routed through :func:`cholesky` /
:func:`solve`; nothing else inverts a covariance matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotPositiveDefinite

# Relative jitter rungs tried in order; scaled by mean(diag(a)) so the
# ladder is invariant to the overall magnitude of the kernel variance.
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular Cholesky factor of a (possibly jittered) matrix.

    ``lower @ lower.T`` reconstructs ``a + jitter_used * I`` where ``a``
    is the matrix passed to :func:`cholesky`.
    """

    lower: np.ndarray
    jitter_used: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]


def cholesky(a: np.ndarray) -> CholFactor:
    """Factor a symmetric PSD matrix, adding diagonal jitter if needed.

    Tries each rung of the jitter ladder (relative to the mean diagonal)
    until the factorization succeeds.

    Parameters
    ----------
    a : (n, n) array
        Symmetric positive-(semi)definite matrix.

    Returns
    -------
    CholFactor
        Factor with the jitter that was actually added recorded.

    Raises
    ------
    NotPositiveDefinite
        If all ladder rungs fail; this signals a broken kernel or
        invalid covariance parameters rather than a tolerable
        near-singularity.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected square matrix, got shape {a.shape}")
    n = a.shape[0]
    mean_diag = float(np.mean(np.diag(a)))
    scale = mean_diag if mean_diag > 0.0 else 1.0
    for rung in JITTER_LADDER:
        jitter = rung * scale
        try:
            target = a if jitter == 0.0 else a + jitter * np.eye(n)
            low = scipy.linalg.cholesky(target, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError:
            continue
        return CholFactor(lower=low, jitter_used=jitter)
    raise NotPositiveDefinite(
        f"matrix of size {n} not positive definite even with jitter "
        f"{JITTER_LADDER[-1] * scale:g}"
    )


def solve(f: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve (a + jitter I) x = b given the factor of a.

    ``b`` may be a vector or a matrix of stacked right-hand sides.
    """
    b = np.asarray(b, dtype=float)
    if b.shape[0] != f.n:
        raise DimensionMismatch(
            f"rhs has leading dimension {b.shape[0]}, factor is {f.n}x{f.n}"
        )
    return scipy.linalg.cho_solve((f.lower, True), b, check_finite=False)


def logdet(f: CholFactor) -> float:
    """Log-determinant of the factored matrix, 2 * sum(log(diag(L)))."""
    return 2.0 * float(np.sum(np.log(np.diag(f.lower))))


def inv(f: CholFactor) -> np.ndarray:
    """Explicit inverse of the factored matrix (used for trace terms)."""
    return solve(f, np.eye(f.n))


def sample_mvn(mean: np.ndarray, f: CholFactor, rng: np.random.Generator) -> np.ndarray:
    """Draw one correlated Gaussian vector ``mean + L z``, z ~ N(0, I).

    The same seeded ``rng`` state yields a bit-identical draw.
    """
    mean = np.asarray(mean, dtype=float)
    if mean.shape != (f.n,):
        raise DimensionMismatch(
            f"mean has shape {mean.shape}, factor is {f.n}x{f.n}"
        )
    z = rng.standard_normal(f.n)
    return mean + f.lower @ z
