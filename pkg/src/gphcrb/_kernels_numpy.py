"""Pure-numpy pairwise kernel fills, the fallback for ``_kernels_numba``.

Same signatures and return conventions as the jitted backend; selected
via the GPHCRB_NO_NUMBA environment flag or when numba is unavailable.
"""

import numpy as np


def _sq_dists(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    return np.sum(diff * diff, axis=-1)


def se_fill(X, Y, b1, b2, with_der):
    r2 = _sq_dists(X, Y)
    e = np.exp(-r2 / (2.0 * b2 * b2))
    K = b1 * b1 * e
    if not with_der:
        return K, np.empty((0,) + K.shape)
    dK = np.stack([2.0 * b1 * e, K * r2 / b2**3])
    return K, dK


def periodic_fill(X, Y, b1, b2, b3, b4, with_der):
    r2 = _sq_dists(X, Y)
    r = np.sqrt(r2)
    s = np.sin(np.pi * r / b3)
    e = np.exp(-2.0 * s * s / (b2 * b2) - r2 / (b4 * b4))
    K = b1 * b1 * e
    if not with_der:
        return K, np.empty((0,) + K.shape)
    dK = np.stack(
        [
            2.0 * b1 * e,
            K * 4.0 * s * s / b2**3,
            K * 2.0 * np.pi * r / (b2 * b2 * b3 * b3) * np.sin(2.0 * np.pi * r / b3),
            K * 2.0 * r2 / b4**3,
        ]
    )
    return K, dK


def rq_fill(X, Y, b1, b2, b3, with_der):
    r2 = _sq_dists(X, Y)
    q = r2 / (2.0 * b2 * b3 * b3)
    t1 = 1.0 + q
    p = t1 ** (-b3)
    K = b1 * b1 * p
    if not with_der:
        return K, np.empty((0,) + K.shape)
    dK = np.stack(
        [
            2.0 * b1 * p,
            K * b3 * q / (b2 * t1),
            K * (2.0 * q / t1 - np.log(t1)),
        ]
    )
    return K, dK


def affine_fill(X, Y, b1, b2, with_der):
    ip = X @ Y.T
    K = b1 + b2 * ip
    if not with_der:
        return K, np.empty((0,) + K.shape)
    dK = np.stack([np.ones_like(ip), ip])
    return K, dK
