"""Information-theoretic measures of the commitment trade-off.

All entropies and informations are in bits.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from qbc.linalg import DimensionError, NotPSDError, hermitian_eig, psd_sqrt, trace_norm
from qbc.states import (
    BipartitePureState,
    DensityOperator,
    ProtocolFamily,
    build_canonical,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)
BOUND_SLACK = 1e-9


class InvariantError(RuntimeError):
    """A bound that must hold by construction was violated."""


def _same_space(rho0: DensityOperator, rho1: DensityOperator) -> None:
    if rho0.dim != rho1.dim:
        raise DimensionError(f"operators act on spaces of size {rho0.dim} and {rho1.dim}")


def fidelity(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Tr sqrt(sqrt(rho1) rho0 sqrt(rho1)), clamped to [0, 1]."""
    _same_space(rho0, rho1)
    r = psd_sqrt(rho1.matrix)
    inner = r @ rho0.matrix @ r
    inner = (inner + inner.conj().T) / 2
    w = hermitian_eig(inner).eigenvalues
    if w.min() < -1e-12:
        raise NotPSDError(f"fidelity kernel has eigenvalue {w.min():.3e}")
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    return min(max(f, 0.0), 1.0)


def fidelity_canonical(theta: float) -> float:
    return abs(math.sin(2 * theta))


def distinguishability(rho0: DensityOperator, rho1: DensityOperator) -> float:
    _same_space(rho0, rho1)
    return 0.5 * trace_norm(rho0.matrix - rho1.matrix)


def bob_error(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """Minimum error probability for telling rho0 from rho1 at equal priors."""
    _same_space(rho0, rho1)
    return 0.5 - 0.25 * trace_norm(rho0.matrix - rho1.matrix)


def binary_entropy(p: float) -> float:
    if p < -1e-12 or p > 1 + 1e-12:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bob_information(rho0: DensityOperator, rho1: DensityOperator) -> float:
    return 1.0 - binary_entropy(bob_error(rho0, rho1))


# The cheating measures below depend on the states only through F, so each
# has a ``*_from_fidelity`` scalar form used by the sweep and the oracles.


def mayers_error_from_fidelity(f: float) -> float:
    return 1.0 - f * f


def mayers_information_from_fidelity(f: float) -> float | None:
    """None when F < 1/sqrt(2): the strategy errs more often than not there."""
    if f < INV_SQRT2 - 1e-12:
        return None
    p = min(mayers_error_from_fidelity(f), 1.0)
    return 0.5 + 0.5 * (1.0 - binary_entropy(max(p, 0.0)))


def hk_error_from_fidelity(f: float) -> float:
    return (1.0 - f) / 2.0


def hk_information_from_fidelity(f: float) -> float:
    return 1.0 - binary_entropy(hk_error_from_fidelity(f))


def mayers_error_bound(rho0: DensityOperator, rho1: DensityOperator) -> float:
    return mayers_error_from_fidelity(fidelity(rho0, rho1))


def mayers_information(rho0: DensityOperator, rho1: DensityOperator) -> float | None:
    return mayers_information_from_fidelity(fidelity(rho0, rho1))


def hk_error_bound(rho0: DensityOperator, rho1: DensityOperator) -> float:
    return hk_error_from_fidelity(fidelity(rho0, rho1))


def hk_error_via_average(rho0: DensityOperator, rho1: DensityOperator, bit: int) -> float:
    """1 - F(rho_b, rho_bar)^2, the route through the averaged state."""
    rho_bar = DensityOperator((rho0.matrix + rho1.matrix) / 2)
    f = fidelity(rho1 if bit else rho0, rho_bar)
    return 1.0 - f * f


def hk_information(rho0: DensityOperator, rho1: DensityOperator) -> float:
    return hk_information_from_fidelity(fidelity(rho0, rho1))


def entanglement_entropy(state: BipartitePureState) -> float:
    """Entropy of the B marginal in bits."""
    w = np.linalg.eigvalsh(state.marginal_b())
    w = w[w > 1e-15]
    return max(0.0, float(-np.sum(w * np.log2(w))))


@dataclass(frozen=True)
class MeasureReport:
    fidelity: float
    distinguishability: float
    bob_err: float
    bob_info: float
    mayers_err: float
    mayers_info: float | None
    hk_err: float
    hk_info: float
    entanglement: float

    @property
    def info_commit(self) -> float:
        """Information released in the commit phase."""
        return self.bob_info

    @property
    def info_open(self) -> float:
        """Information left for the opening phase."""
        return 1.0 - self.bob_info

    def as_dict(self) -> dict:
        return asdict(self)


def report(family: ProtocolFamily) -> MeasureReport:
    """Every measure for one family, with the trade-off bounds checked.

    ``entanglement`` is the smaller of E(psi_0), E(psi_1); the two coincide
    whenever the block spectra have equal entropy.
    """
    states = build_canonical(family)
    rho0, rho1 = states.rho0, states.rho1
    f = fidelity(rho0, rho1)
    d = distinguishability(rho0, rho1)
    p_bob = 0.5 - 0.5 * d
    i_bob = 1.0 - binary_entropy(p_bob)
    i_m = mayers_information_from_fidelity(f)
    i_hk = hk_information_from_fidelity(f)
    ent = min(entanglement_entropy(states.psi0), entanglement_entropy(states.psi1))

    if i_bob + i_hk > 1 + BOUND_SLACK:
        raise InvariantError(f"I_bob + I_hk = {i_bob + i_hk!r} exceeds 1")
    if i_m is not None and i_bob + i_m > 1 + BOUND_SLACK:
        raise InvariantError(f"I_bob + I_m = {i_bob + i_m!r} exceeds 1")
    for name, val in (("I_hk", i_hk), ("I_m", i_m)):
        if val is not None and val > ent + BOUND_SLACK:
            raise InvariantError(f"{name} = {val!r} exceeds entanglement {ent!r}")

    return MeasureReport(
        fidelity=f,
        distinguishability=d,
        bob_err=p_bob,
        bob_info=i_bob,
        mayers_err=mayers_error_from_fidelity(f),
        mayers_info=i_m,
        hk_err=hk_error_from_fidelity(f),
        hk_info=i_hk,
        entanglement=ent,
    )
