"""Dense complex linear algebra on small Hilbert spaces.

Matrices are plain ``numpy`` complex arrays. Every routine is a pure function
and validates its input before doing any work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-12
DEGENERACY_TOL = 1e-9


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvalues`` are sorted in descending order and ``eigenvectors`` holds
    the matching orthonormal vectors as columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - m.conj().T)) <= tol)


def _require_hermitian(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix is not square: {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e})")


def ket(v) -> np.ndarray:
    """Column-free 1-D complex vector."""
    return np.asarray(v, dtype=np.complex128).reshape(-1)


def projector(v) -> np.ndarray:
    v = ket(v)
    return np.outer(v, v.conj())


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dim_a: int, dim_b: int, over: str = "A") -> np.ndarray:
    """Trace out subsystem ``over`` ("A" or "B") of an operator on A (x) B."""
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise DimensionError(
            f"operator shape {m.shape} does not match dims ({dim_a}, {dim_b})"
        )
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if over == "A":
        return np.einsum("ijik->jk", t)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"unknown subsystem label {over!r}; use 'A' or 'B'")


def _phase_fix(v: np.ndarray) -> np.ndarray:
    # first entry with non-negligible magnitude becomes real positive
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size == 0:
        return v
    z = v[idx[0]]
    return v * (abs(z) / z)


def _lex_key(v: np.ndarray) -> tuple:
    r = np.round(v, 12)
    return tuple(x for pair in zip(r.real, r.imag) for x in pair)


def _canonical_block(vecs: np.ndarray) -> np.ndarray:
    """Basis-independent orthonormal basis for the span of ``vecs``.

    Projects the standard basis onto the span and Gram-Schmidts the result,
    so any rotation of the input yields the same output.
    """
    n, k = vecs.shape
    proj = vecs @ vecs.conj().T
    basis: list[np.ndarray] = []
    for col in range(n):
        x = proj[:, col].copy()
        for _ in range(2):
            for b in basis:
                x -= b * np.vdot(b, x)
        norm = np.linalg.norm(x)
        if norm > 1e-6:
            basis.append(x / norm)
        if len(basis) == k:
            break
    out = [_phase_fix(b) for b in basis]
    out.sort(key=_lex_key, reverse=True)
    return np.column_stack(out)


def hermitian_eig(m) -> Spectrum:
    """Eigen-decomposition with a reproducible ordering.

    Eigenvalues come out descending. Inside a degenerate block the basis is
    rebuilt from the projected standard basis, phase-fixed so the first
    nonzero entry is real positive, and ordered lexicographically by the
    (real, imag) entry sequence.
    """
    m = as_matrix(m)
    _require_hermitian(m)
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]

    scale = max(1.0, float(np.max(np.abs(w))))
    cols = []
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[start] - w[stop] <= DEGENERACY_TOL * scale:
            stop += 1
        if stop - start == 1:
            cols.append(_phase_fix(v[:, start])[:, None])
        else:
            cols.append(_canonical_block(v[:, start:stop]))
        start = stop
    return Spectrum(eigenvalues=w.copy(), eigenvectors=np.hstack(cols))


def psd_sqrt(m) -> np.ndarray:
    spec = hermitian_eig(m)
    w = spec.eigenvalues
    if np.min(w) < -PSD_TOL:
        raise NotPSDError(f"matrix has eigenvalue {np.min(w):.3e} < -{PSD_TOL}")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = spec.eigenvectors
    return (v * root) @ v.conj().T


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = as_matrix(m)
    _require_hermitian(m)
    return float(np.sum(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues under 1e-15 contribute nothing."""
    w = np.linalg.eigvalsh(as_matrix(rho))
    w = w[w > 1e-15]
    return max(0.0, float(-np.sum(w * np.log2(w))))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * rng.random())]])
    return unitary_group.rvs(dim, random_state=rng)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def orthonormal_complement(a: np.ndarray) -> np.ndarray:
    """Reproducible orthonormal basis (columns) of the complement of span(a)."""
    n, k = a.shape
    if k >= n:
        return np.zeros((n, 0), dtype=np.complex128)
    comp = np.eye(n) - a @ a.conj().T
    spec = np.linalg.eigh((comp + comp.conj().T) / 2)
    vecs = spec[1][:, spec[0] > 0.5]
    return _canonical_block(vecs)
