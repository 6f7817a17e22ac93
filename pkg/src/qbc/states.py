"""Honest commitment states, purifications and Schmidt decompositions.

Basis layout used throughout: on both A and B, indices ``[0, r0)`` carry the
Schmidt vectors of the bit-0 block and ``[r0, r0 + r1)`` those of the bit-1
block, so the two blocks are orthogonal by construction rather than up to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qbc.linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    DimensionError,
    as_matrix,
    hermitian_eig,
    ket,
    partial_trace,
    random_unitary,
)

NORM_TOL = 1e-10
THETA_MAX = math.pi / 4


class StructureError(ValueError):
    """Input states lack the structure a construction relies on."""


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Unit-trace PSD Hermitian operator.

    ``dims`` is set for operators on a bipartite space A (x) B and is ``None``
    for single-system operators.
    """

    matrix: np.ndarray
    label: str = "B"
    dims: tuple[int, int] | None = None

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        if self.dims is not None and self.dims[0] * self.dims[1] != m.shape[0]:
            raise DimensionError(f"dims {self.dims} do not match size {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix has trace {tr!r}")
        if np.min(np.linalg.eigvalsh(m)) < -PSD_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def marginal(self, keep: str = "B") -> DensityOperator:
        if self.dims is None:
            raise DimensionError("operator has no bipartite structure")
        over = "A" if keep == "B" else "B"
        m = partial_trace(self.matrix, *self.dims, over=over)
        return DensityOperator(m, label=keep)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self):
        v = ket(self.amplitudes)
        if v.size != self.dim_a * self.dim_b:
            raise DimensionError(
                f"{v.size} amplitudes do not fit dims ({self.dim_a}, {self.dim_b})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("amplitudes have non-finite entries")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def coefficient_matrix(self) -> np.ndarray:
        """Amplitudes as a dim_a x dim_b matrix."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def density(self) -> np.ndarray:
        v = self.amplitudes
        return np.outer(v, v.conj())

    def as_density(self) -> DensityOperator:
        return DensityOperator(self.density(), label="AB", dims=(self.dim_a, self.dim_b))

    def marginal_b(self) -> np.ndarray:
        m = self.coefficient_matrix
        return m.T @ m.conj()

    def marginal_a(self) -> np.ndarray:
        m = self.coefficient_matrix
        return m @ m.conj().T

    def overlap(self, other: BipartitePureState) -> complex:
        """Inner product <self|other>."""
        if (self.dim_a, self.dim_b) != (other.dim_a, other.dim_b):
            raise DimensionError("states live on different spaces")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def apply_a(self, u: np.ndarray) -> BipartitePureState:
        """Apply ``u`` to subsystem A."""
        out = np.asarray(u) @ self.coefficient_matrix
        return BipartitePureState(self.dim_a, self.dim_b, out.reshape(-1))


@dataclass(frozen=True)
class SchmidtForm:
    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ik,jk->ij", self.coefficients, self.basis_a, self.basis_b).reshape(-1)


def _check_spectrum(name: str, s) -> tuple[float, ...]:
    s = tuple(float(x) for x in s)
    if not s:
        raise ValueError(f"{name} is empty")
    if min(s) < 0:
        raise ValueError(f"{name} has negative entries")
    if abs(sum(s) - 1.0) > 1e-10:
        raise ValueError(f"{name} does not sum to 1 (sum {sum(s)!r})")
    return s


@dataclass(frozen=True)
class ProtocolFamily:
    """Parameters of the honest state family.

    ``spectrum0``/``spectrum1`` are the squared Schmidt weights of the two
    orthogonal blocks; ``theta`` mixes the blocks.
    """

    theta: float
    spectrum0: tuple[float, ...] = (1.0,)
    spectrum1: tuple[float, ...] = (1.0,)
    dim_a: int = 2
    dim_b: int = 2

    def __post_init__(self):
        if not (-1e-12 <= self.theta <= THETA_MAX + 1e-12) or not math.isfinite(self.theta):
            raise ValueError(f"theta={self.theta!r} outside [0, pi/4]")
        object.__setattr__(self, "theta", min(max(float(self.theta), 0.0), THETA_MAX))
        object.__setattr__(self, "spectrum0", _check_spectrum("spectrum0", self.spectrum0))
        object.__setattr__(self, "spectrum1", _check_spectrum("spectrum1", self.spectrum1))
        need = len(self.spectrum0) + len(self.spectrum1)
        if self.dim_b < need:
            raise ValueError(f"dim_b={self.dim_b} cannot host both blocks (need {need})")
        if self.dim_a < 2:
            raise ValueError("dim_a must be at least 2")

    @classmethod
    def minimal(cls, theta: float) -> ProtocolFamily:
        return cls(theta)

    @classmethod
    def from_fidelity(cls, fidelity: float, spectrum0=(1.0,), spectrum1=(1.0,)) -> ProtocolFamily:
        if not 0.0 <= fidelity <= 1.0:
            raise ValueError(f"fidelity={fidelity!r} outside [0, 1]")
        return cls.with_spectra(math.asin(fidelity) / 2, spectrum0, spectrum1)

    @classmethod
    def with_spectra(cls, theta: float, spectrum0, spectrum1) -> ProtocolFamily:
        """Family with the smallest dimensions that carry both blocks."""
        n = max(2, len(spectrum0) + len(spectrum1))
        return cls(theta, tuple(spectrum0), tuple(spectrum1), dim_a=n, dim_b=n)

    @property
    def r0(self) -> int:
        return len(self.spectrum0)

    @property
    def r1(self) -> int:
        return len(self.spectrum1)

    @property
    def is_minimal(self) -> bool:
        return (
            self.dim_a == 2
            and self.dim_b == 2
            and self.spectrum0 == (1.0,)
            and self.spectrum1 == (1.0,)
        )

    def hat_rho(self, bit: int) -> np.ndarray:
        """Block operator on B for ``bit`` (diagonal in the layout basis)."""
        d = np.zeros(self.dim_b)
        if bit == 0:
            d[: self.r0] = self.spectrum0
        else:
            d[self.r0 : self.r0 + self.r1] = self.spectrum1
        return np.diag(d).astype(np.complex128)

    def block_projector(self, bit: int) -> np.ndarray:
        """Projector onto the support slot reserved for block ``bit`` on B."""
        d = np.zeros(self.dim_b)
        if bit == 0:
            d[: self.r0] = 1.0
        else:
            d[self.r0 : self.r0 + self.r1] = 1.0
        return np.diag(d).astype(np.complex128)

    def basis_states(self) -> tuple[BipartitePureState, BipartitePureState]:
        """The two orthonormal vectors spanning the code subspace M."""
        need = self.r0 + self.r1
        if self.dim_a < need:
            raise DimensionError(
                f"dim_a={self.dim_a} too small for Schmidt rank; need dim_a >= {need}"
            )
        zero = np.zeros((self.dim_a, self.dim_b), dtype=np.complex128)
        one = np.zeros_like(zero)
        for i, p in enumerate(self.spectrum0):
            zero[i, i] = math.sqrt(p)
        for i, p in enumerate(self.spectrum1):
            one[self.r0 + i, self.r0 + i] = math.sqrt(p)
        return (
            BipartitePureState(self.dim_a, self.dim_b, zero.reshape(-1)),
            BipartitePureState(self.dim_a, self.dim_b, one.reshape(-1)),
        )

    def combine(self, c0: float, c1: float) -> BipartitePureState:
        """c0|0_AB> + c1|1_AB>."""
        zero, one = self.basis_states()
        v = c0 * zero.amplitudes + c1 * one.amplitudes
        return BipartitePureState(self.dim_a, self.dim_b, v)


class CanonicalStates(NamedTuple):
    psi0: BipartitePureState
    psi1: BipartitePureState
    rho0: DensityOperator
    rho1: DensityOperator

    @property
    def rho_bar(self) -> DensityOperator:
        return DensityOperator((self.rho0.matrix + self.rho1.matrix) / 2)

    def psi(self, bit: int) -> BipartitePureState:
        return self.psi1 if bit else self.psi0

    def rho(self, bit: int) -> DensityOperator:
        return self.rho1 if bit else self.rho0


def build_canonical(family: ProtocolFamily) -> CanonicalStates:
    c, s = math.cos(family.theta), math.sin(family.theta)
    psi0 = family.combine(c, s)
    psi1 = family.combine(-s, c)
    rho0 = DensityOperator(psi0.marginal_b())
    rho1 = DensityOperator(psi1.marginal_b())
    return CanonicalStates(psi0, psi1, rho0, rho1)


def schmidt_decompose(state: BipartitePureState) -> SchmidtForm:
    """Schmidt form with real non-negative coefficients, descending.

    The A-side basis comes from :func:`hermitian_eig` of the A marginal, so
    degenerate coefficients get a reproducible basis; all phases end up in
    ``basis_b``.
    """
    m = state.coefficient_matrix
    spec = hermitian_eig(m @ m.conj().T)
    keep = spec.eigenvalues >= 1e-12
    lam = spec.eigenvalues[keep]
    basis_a = spec.eigenvectors[:, keep]
    coeffs = np.sqrt(lam)
    basis_b = (basis_a.conj().T @ m).T / coeffs
    return SchmidtForm(coeffs, basis_a, basis_b)


def purify(rho: DensityOperator, dim_a: int) -> BipartitePureState:
    """Canonical purification sum_i sqrt(l_i) |i>_A |v_i>_B."""
    spec = hermitian_eig(rho.matrix)
    lam = np.clip(spec.eigenvalues, 0.0, None)
    rank = int(np.sum(lam > PSD_TOL))
    if dim_a < rank:
        raise DimensionError(f"dim_a={dim_a} below rank {rank} of the state")
    dim_b = rho.dim
    coeff = np.zeros((dim_a, dim_b), dtype=np.complex128)
    for i in range(rank):
        coeff[i] = math.sqrt(lam[i]) * spec.eigenvectors[:, i]
    v = coeff.reshape(-1)
    return BipartitePureState(dim_a, dim_b, v / np.linalg.norm(v))


def _check_mixing(name: str, m) -> np.ndarray:
    m = np.asarray(m, dtype=float).reshape(-1)
    if m.size == 0 or np.any(m < 0) or abs(m.sum() - 1.0) > 1e-10:
        raise ValueError(f"{name} must be a probability vector")
    return m


def build_evidence_states(
    family: ProtocolFamily, mixing0, mixing1, dim_a: int | None = None
) -> tuple[DensityOperator, DensityOperator]:
    """Mixed evidence states with a classical label on A.

    A is extended to ``label (x) A_core`` with one label slot per mixing weight;
    chi_b = sum_k w_bk |k><k| (x) |psi_b><psi_b|. Each eigenvector then has an
    A-support orthogonal to the others, and Tr_A chi_b = rho_b.
    """
    m0 = _check_mixing("mixing0", mixing0)
    m1 = _check_mixing("mixing1", mixing1)
    labels = max(m0.size, m1.size)
    need = labels * family.dim_a
    if dim_a is not None and dim_a < need:
        raise DimensionError(f"dim_a={dim_a} cannot host {labels} classical labels (need {need})")
    states = build_canonical(family)
    out = []
    for w, psi in ((m0, states.psi0), (m1, states.psi1)):
        weights = np.zeros(labels)
        weights[: w.size] = w
        chi = np.kron(np.diag(weights), psi.density())
        out.append(DensityOperator(chi, label="AB", dims=(need, family.dim_b)))
    return out[0], out[1]


def _reduced_cross(e: np.ndarray, f: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Tr_A |e><f| as a dim_b x dim_b matrix."""
    me = e.reshape(dim_a, dim_b)
    mf = f.reshape(dim_a, dim_b)
    return me.T @ mf.conj()


_PROBE_RNG_SEED = 0x5EED


def _classical_eigenbasis(chi: DensityOperator) -> tuple[np.ndarray, np.ndarray]:
    """Support eigenvalues and eigenvectors with mutually orthogonal A-supports.

    Inside a degenerate eigenspace the basis is free; it is fixed by
    diagonalising I_A (x) Y for a fixed probe Y on B, which is diagonal in
    any basis satisfying the classical-label condition.
    """
    dim_a, dim_b = chi.dims
    spec = hermitian_eig(chi.matrix)
    keep = spec.eigenvalues > PSD_TOL
    lam = spec.eigenvalues[keep]
    vecs = spec.eigenvectors[:, keep].copy()
    probe_rng = np.random.default_rng(_PROBE_RNG_SEED)
    g = probe_rng.normal(size=(dim_b, dim_b)) + 1j * probe_rng.normal(size=(dim_b, dim_b))
    probe = np.kron(np.eye(dim_a), (g + g.conj().T) / 2)
    start = 0
    while start < lam.size:
        stop = start + 1
        while stop < lam.size and lam[start] - lam[stop] <= 1e-9:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            _, w = np.linalg.eigh(block.conj().T @ probe @ block)
            vecs[:, start:stop] = block @ w
        start = stop
    return lam, vecs


def orthogonal_purifications(
    chi0: DensityOperator, chi1: DensityOperator
) -> tuple[BipartitePureState, BipartitePureState]:
    """Mutually orthogonal purifications of the B-marginals of chi0, chi1.

    Each output is sum_e sqrt(l_e) |e> over the eigenvectors of chi_b, which
    keeps it inside the support of chi_b. Raises ``StructureError`` if the
    inputs are not orthogonal or if the eigenvectors' A-supports overlap (the
    marginal would then pick up cross terms).
    """
    if chi0.dims is None or chi0.dims != chi1.dims:
        raise DimensionError("both operators need the same bipartite dims")
    dim_a, dim_b = chi0.dims
    prod = max(
        np.max(np.abs(chi0.matrix @ chi1.matrix)),
        np.max(np.abs(chi1.matrix @ chi0.matrix)),
    )
    if prod > 1e-8:
        raise StructureError(f"evidence states are not orthogonal (|chi0 chi1| = {prod:.3e})")
    out = []
    for name, chi in (("chi0", chi0), ("chi1", chi1)):
        lam, vecs = _classical_eigenbasis(chi)
        worst = 0.0
        for i in range(lam.size):
            for j in range(i + 1, lam.size):
                c = _reduced_cross(vecs[:, i], vecs[:, j], dim_a, dim_b)
                worst = max(worst, float(np.max(np.abs(c))))
        if worst > 1e-8:
            raise StructureError(
                f"{name}: eigenvectors share A-support; cross term Tr_A|e><e'| "
                f"reaches {worst:.3e}, so no purification of this form reproduces the marginal"
            )
        v = vecs @ np.sqrt(lam)
        out.append(BipartitePureState(dim_a, dim_b, v / np.linalg.norm(v)))
    return out[0], out[1]


def random_classical_pair(
    rng: np.random.Generator,
    rank0: int,
    rank1: int,
    dim_b: int = 2,
    degenerate: bool = False,
) -> tuple[DensityOperator, DensityOperator]:
    """Random orthogonal evidence pair whose eigenvectors carry classical A labels.

    Every eigenvector gets its own two-dimensional A block holding a random
    entangled state with B; a global random unitary on A then hides the block
    layout.
    """
    n = rank0 + rank1
    block = 2
    dim_a = block * n
    vecs = []
    for k in range(n):
        local = rng.normal(size=(block, dim_b)) + 1j * rng.normal(size=(block, dim_b))
        full = np.zeros((dim_a, dim_b), dtype=np.complex128)
        full[block * k : block * (k + 1)] = local / np.linalg.norm(local)
        vecs.append(full)
    u = random_unitary(dim_a, rng)
    vecs = [(u @ v).reshape(-1) for v in vecs]

    def weights(r):
        if degenerate:
            return np.full(r, 1.0 / r)
        w = rng.random(r) + 0.1
        return w / w.sum()

    def mix(vs, w):
        return sum(p * np.outer(v, v.conj()) for p, v in zip(w, vs))

    chi0 = mix(vecs[:rank0], weights(rank0))
    chi1 = mix(vecs[rank0:], weights(rank1))
    dims = (dim_a, dim_b)
    return (
        DensityOperator(chi0 / np.trace(chi0).real, "AB", dims),
        DensityOperator(chi1 / np.trace(chi1).real, "AB", dims),
    )
