"""Orthonormal discrete cosine transform (type II) and inverse.

Direct O(N^2) evaluation against a cached basis matrix. The basis is
orthonormal, so the transform preserves the L2 norm exactly (up to float
rounding); that property is what the privacy analysis of the survival-curve
mechanism relies on.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _basis(n: int) -> np.ndarray:
    # B[k, j] = c_k * cos(k * pi * (2j + 1) / (2n)),
    # c_0 = sqrt(1/n), c_k = sqrt(2/n) for k > 0.
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    b = np.cos(k * np.pi * (2 * j + 1) / (2.0 * n))
    scale = np.full(n, np.sqrt(2.0 / n))
    scale[0] = np.sqrt(1.0 / n)
    return scale[:, None] * b


def _asvector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    return v


def dct(x) -> np.ndarray:
    """Forward orthonormal DCT-II coefficients of a real vector."""
    v = _asvector(x, "x")
    return _basis(v.size) @ v


def idct(y) -> np.ndarray:
    """Inverse transform; idct(dct(x)) == x up to float rounding."""
    v = _asvector(y, "y")
    return _basis(v.size).T @ v


def truncate(y, k: int) -> np.ndarray:
    """Keep the first ``k`` coefficients, zero the rest. Returns a copy."""
    v = _asvector(y, "y")
    if not 1 <= k <= v.size:
        raise ValueError(f"k must be in [1, {v.size}], got {k}")
    out = v.copy()
    out[k:] = 0.0
    return out
