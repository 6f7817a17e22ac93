"""Alice's cheating plans and the local unitary that realises them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from qbc.linalg import hermitian_eig, orthonormal_complement
from qbc.states import (
    BipartitePureState,
    ProtocolFamily,
    build_canonical,
    purify,
)

MARGINAL_TOL = 1e-8


class MarginalMismatchError(ValueError):
    """Two states differ on B, so no unitary on A maps one to the other."""


class Strategy(enum.Enum):
    HONEST = "honest"
    MAYERS = "mayers"
    HARDY_KENT = "hk"


@dataclass(frozen=True)
class StrategyKind:
    strategy: Strategy
    evidence_bit: int | None = None

    def __post_init__(self):
        if self.strategy is Strategy.MAYERS and self.evidence_bit not in (0, 1):
            raise ValueError("Mayers strategy needs the evidence bit (0 or 1)")

    @classmethod
    def honest(cls) -> StrategyKind:
        return cls(Strategy.HONEST)

    @classmethod
    def mayers(cls, evidence_bit: int) -> StrategyKind:
        return cls(Strategy.MAYERS, evidence_bit)

    @classmethod
    def hardy_kent(cls) -> StrategyKind:
        return cls(Strategy.HARDY_KENT)

    def __str__(self) -> str:
        if self.strategy is Strategy.MAYERS:
            return f"mayers({self.evidence_bit})"
        return self.strategy.value


@dataclass(frozen=True, eq=False)
class CheatPlan:
    """What Alice prepares and what she can turn it into at opening time.

    ``fake_states[b]`` is the state she holds when unveiling ``b``.
    """

    initial_state: BipartitePureState
    fake_states: tuple[BipartitePureState, BipartitePureState]
    strategy: StrategyKind

    def __post_init__(self):
        ref = self.initial_state.marginal_b()
        for b, fake in enumerate(self.fake_states):
            dev = float(np.max(np.abs(fake.marginal_b() - ref)))
            if dev > 1e-9:
                raise MarginalMismatchError(
                    f"fake state for unveil {b} changes Bob's marginal by {dev:.3e}"
                )


def mayers_plan(family: ProtocolFamily, evidence_bit: int) -> CheatPlan:
    """Send rho_b honestly, keep the option to open the other bit.

    The flipped fake state is the purification of rho_b closest to
    |psi_{not b}>; its overlap with it equals F(rho0, rho1).
    """
    if evidence_bit not in (0, 1):
        raise ValueError("evidence_bit must be 0 or 1")
    c, s = math.cos(family.theta), math.sin(family.theta)
    states = build_canonical(family)
    if evidence_bit == 0:
        fakes = (states.psi0, family.combine(-c, s))
    else:
        fakes = (family.combine(s, c), states.psi1)
    return CheatPlan(states.psi(evidence_bit), fakes, StrategyKind.mayers(evidence_bit))


def hk_plan(family: ProtocolFamily) -> CheatPlan:
    """Send the average marginal; either bit opens with the same error."""
    states = build_canonical(family)
    initial = purify(states.rho_bar, family.dim_a)
    r = 1.0 / math.sqrt(2.0)
    fakes = (family.combine(r, r), family.combine(-r, r))
    return CheatPlan(initial, fakes, StrategyKind.hardy_kent())


def switching_unitary(frm: BipartitePureState, to: BipartitePureState) -> np.ndarray:
    """Unitary U on A with (U (x) I)|frm> = |to>.

    The states must share their B marginal. U maps the A-side Schmidt frame
    of ``frm`` onto the matching frame of ``to``; on the rest of A it maps a
    reproducible complement basis of one onto the other, which is the
    identity whenever both frames span the same subspace.
    """
    if (frm.dim_a, frm.dim_b) != (to.dim_a, to.dim_b):
        raise MarginalMismatchError("states live on different spaces")
    dev = float(np.max(np.abs(frm.marginal_b() - to.marginal_b())))
    if dev > MARGINAL_TOL:
        raise MarginalMismatchError(f"B marginals differ by {dev:.3e}")
    m_from = frm.coefficient_matrix
    m_to = to.coefficient_matrix
    spec = hermitian_eig(m_from @ m_from.conj().T)
    keep = spec.eigenvalues > 1e-12
    sig = np.sqrt(spec.eigenvalues[keep])
    a_from = spec.eigenvectors[:, keep]
    # v_i = M^dag a_i / s_i is a shared B-side frame because M^dag M agree
    v = (m_from.conj().T @ a_from) / sig
    a_to = (m_to @ v) / sig
    w, _, vh = np.linalg.svd(a_to, full_matrices=False)
    a_to = w @ vh
    u = a_to @ a_from.conj().T
    c_from = orthonormal_complement(a_from)
    c_to = orthonormal_complement(a_to)
    if c_from.shape[1]:
        u = u + c_to @ c_from.conj().T
    return u


def alice_detection_bound(fake: BipartitePureState, honest: BipartitePureState) -> float:
    """Least probability that Bob's opening test catches ``fake``."""
    ov = abs(honest.overlap(fake))
    return max(0.0, 1.0 - ov * ov)
