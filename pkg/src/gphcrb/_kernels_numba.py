"""Numba-jitted pairwise kernel fills.

Each function returns the kernel matrix K(X, Y) and, when requested, the
stack of exact derivative matrices dK/dbeta_i. These are the hot inner
loops of the Monte-Carlo harness (they run once per marginal-likelihood
evaluation); keep them free of Python objects.

The pure-numpy twin lives in ``_kernels_numpy`` with identical
signatures; ``kernels`` picks the backend at import time.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def se_fill(X, Y, b1, b2, with_der):
    n, m, d = X.shape[0], Y.shape[0], X.shape[1]
    K = np.empty((n, m))
    dK = np.empty((2 if with_der else 0, n, m))
    inv2 = 1.0 / (2.0 * b2 * b2)
    inv3 = 1.0 / (b2 * b2 * b2)
    for i in range(n):
        for j in range(m):
            r2 = 0.0
            for k in range(d):
                t = X[i, k] - Y[j, k]
                r2 += t * t
            e = np.exp(-r2 * inv2)
            K[i, j] = b1 * b1 * e
            if with_der:
                dK[0, i, j] = 2.0 * b1 * e
                dK[1, i, j] = K[i, j] * r2 * inv3
    return K, dK


@njit(cache=True)
def periodic_fill(X, Y, b1, b2, b3, b4, with_der):
    n, m, d = X.shape[0], Y.shape[0], X.shape[1]
    K = np.empty((n, m))
    dK = np.empty((4 if with_der else 0, n, m))
    for i in range(n):
        for j in range(m):
            r2 = 0.0
            for k in range(d):
                t = X[i, k] - Y[j, k]
                r2 += t * t
            r = np.sqrt(r2)
            phase = np.pi * r / b3
            s = np.sin(phase)
            e = np.exp(-2.0 * s * s / (b2 * b2) - r2 / (b4 * b4))
            kij = b1 * b1 * e
            K[i, j] = kij
            if with_der:
                # sin(2 phase) = 2 sin(phase) cos(phase); saves a libm call
                c = np.cos(phase)
                dK[0, i, j] = 2.0 * b1 * e
                dK[1, i, j] = kij * 4.0 * s * s / (b2 * b2 * b2)
                dK[2, i, j] = (
                    kij * 2.0 * np.pi * r / (b2 * b2 * b3 * b3) * (2.0 * s * c)
                )
                dK[3, i, j] = kij * 2.0 * r2 / (b4 * b4 * b4)
    return K, dK


@njit(cache=True)
def rq_fill(X, Y, b1, b2, b3, with_der):
    n, m, d = X.shape[0], Y.shape[0], X.shape[1]
    K = np.empty((n, m))
    dK = np.empty((3 if with_der else 0, n, m))
    for i in range(n):
        for j in range(m):
            r2 = 0.0
            for k in range(d):
                t = X[i, k] - Y[j, k]
                r2 += t * t
            q = r2 / (2.0 * b2 * b3 * b3)
            t1 = 1.0 + q
            lg = np.log(t1)
            p = np.exp(-b3 * lg)  # t1 ** (-b3) without a second libm call
            kij = b1 * b1 * p
            K[i, j] = kij
            if with_der:
                dK[0, i, j] = 2.0 * b1 * p
                dK[1, i, j] = kij * b3 * q / (b2 * t1)
                dK[2, i, j] = kij * (2.0 * q / t1 - lg)
    return K, dK


@njit(cache=True)
def affine_fill(X, Y, b1, b2, with_der):
    n, m, d = X.shape[0], Y.shape[0], X.shape[1]
    K = np.empty((n, m))
    dK = np.empty((2 if with_der else 0, n, m))
    for i in range(n):
        for j in range(m):
            ip = 0.0
            for k in range(d):
                ip += X[i, k] * Y[j, k]
            K[i, j] = b1 + b2 * ip
            if with_der:
                dK[0, i, j] = 1.0
                dK[1, i, j] = ip
    return K, dK
