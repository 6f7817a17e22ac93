"""Hot sampling loops for the Monte Carlo protocol runs.

Two interchangeable backends draw two-stage Born outcomes from precomputed
cumulative tables. Given the same uniforms they return identical arrays.

``QBC_BACKEND=numpy`` forces the vectorised numpy path; ``numba`` (the
default when numba imports) uses the jitted loop.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


def _sample_two_stage_numpy(first_cdf, second_cdf, uniforms):
    first = np.searchsorted(first_cdf, uniforms[:, 0], side="right")
    np.minimum(first, first_cdf.size - 1, out=first)
    second = np.empty_like(first)
    for j in range(first_cdf.size):
        mask = first == j
        if mask.any():
            second[mask] = np.searchsorted(second_cdf[j], uniforms[mask, 1], side="right")
    return first, second


def _search(cdf, u):
    n = cdf.shape[0]
    for k in range(n):
        if u < cdf[k]:
            return k
    return n


def _sample_two_stage_loop(first_cdf, second_cdf, uniforms):
    n = uniforms.shape[0]
    k = first_cdf.shape[0]
    first = np.empty(n, dtype=np.int64)
    second = np.empty(n, dtype=np.int64)
    for i in range(n):
        j = _search(first_cdf, uniforms[i, 0])
        if j >= k:
            j = k - 1
        first[i] = j
        second[i] = _search(second_cdf[j], uniforms[i, 1])
    return first, second


if HAVE_NUMBA:
    _search_jit = njit(cache=True)(_search)

    @njit(cache=True)
    def _sample_two_stage_numba(first_cdf, second_cdf, uniforms):
        n = uniforms.shape[0]
        k = first_cdf.shape[0]
        first = np.empty(n, dtype=np.int64)
        second = np.empty(n, dtype=np.int64)
        for i in range(n):
            j = _search_jit(first_cdf, uniforms[i, 0])
            if j >= k:
                j = k - 1
            first[i] = j
            second[i] = _search_jit(second_cdf[j], uniforms[i, 1])
        return first, second


def backend() -> str:
    choice = os.environ.get("QBC_BACKEND", "").strip().lower()
    if choice == "numpy" or not HAVE_NUMBA:
        return "numpy"
    if choice in ("", "numba"):
        return "numba"
    raise ValueError(f"unknown QBC_BACKEND={choice!r}; use 'numba' or 'numpy'")


def sample_two_stage(first_cdf, second_cdf, uniforms, *, use: str | None = None):
    """Sample (first, second) outcome indices for each row of ``uniforms``.

    ``first_cdf`` has shape (k,), ``second_cdf`` shape (k, m) with row j the
    cumulative distribution conditioned on first outcome j. A second index
    equal to m means the conditional row was all zero.
    """
    first_cdf = np.ascontiguousarray(first_cdf, dtype=np.float64)
    second_cdf = np.ascontiguousarray(second_cdf, dtype=np.float64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    which = use or backend()
    if which == "numba":
        return _sample_two_stage_numba(first_cdf, second_cdf, uniforms)
    if which == "loop":
        return _sample_two_stage_loop(first_cdf, second_cdf, uniforms)
    return _sample_two_stage_numpy(first_cdf, second_cdf, uniforms)
