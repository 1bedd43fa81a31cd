"""Flat-vector arithmetic over contiguous float64 arrays.

Thin, shape-checked wrappers around numpy; everything stays in 64-bit
floats so optimizer curvature tests behave identically across platforms.
"""

from __future__ import annotations

import numpy as np


def as_vector(values) -> np.ndarray:
    """Coerce to a 1-D float64 array (copying only when needed)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def dot(a, b) -> float:
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.dot(a, b))


def axpy(alpha: float, x, y) -> np.ndarray:
    """alpha*x + y as a new vector."""
    x = as_vector(x)
    y = as_vector(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return alpha * x + y


def norm_inf(v) -> float:
    """Largest absolute component; 0 for the empty vector."""
    v = as_vector(v)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))
