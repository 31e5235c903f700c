"""Input-point normalization shared by mean and covariance functions."""

from __future__ import annotations

import numpy as np


def as_points(xs) -> np.ndarray:
    """Coerce scalars, 1-D, or 2-D array-likes to an (N, d) float array."""
    arr = np.asarray(xs, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValueError(f"points must be at most 2-D, got shape {arr.shape}")
    return np.ascontiguousarray(arr)
