"""Monte Carlo runs of the commit/open protocol.

Every run draws all its randomness from one Philox generator keyed by the
run seed; trial ``i`` consumes uniforms ``2i`` and ``2i + 1``. Outcome tables
are exact Born probabilities, and the trial loop lives in
:mod:`qbc._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from qbc import _kernels
from qbc.measures import bob_error
from qbc.states import (
    BipartitePureState,
    DensityOperator,
    ProtocolFamily,
    build_canonical,
    build_evidence_states,
)
from qbc.strategies import CheatPlan, StrategyKind, alice_detection_bound

# Born probabilities below this are rounding noise and are zeroed before sampling.
PROB_FLOOR = 1e-14
COMPLETENESS_TOL = 1e-9


class MinimalModelError(ValueError):
    """Raised for families outside the two-qubit, pure-block model."""


def _require_minimal(family: ProtocolFamily) -> None:
    if not family.is_minimal:
        raise MinimalModelError(
            "the opening test is only constructed for the minimal qubit model "
            "(dim_a = dim_b = 2, pure block spectra); no equal-overlap basis is "
            "available for larger families"
        )


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Alice's basis on A plus, per outcome j, Bob's test projectors on B.

    ``bob_tests[j][b]`` projects onto the B state that |psi_b> leaves behind
    when Alice finds ``vectors[:, j]``.
    """

    vectors: np.ndarray
    bob_tests: tuple[tuple[np.ndarray, np.ndarray], ...]

    def alice_projectors(self) -> list[np.ndarray]:
        v = self.vectors
        return [np.outer(v[:, j], v[:, j].conj()) for j in range(v.shape[1])]


def conditional_b_vector(state: BipartitePureState, e: np.ndarray) -> np.ndarray:
    """Unnormalised B vector <e|psi> left after Alice projects onto ``e``."""
    return e.conj() @ state.coefficient_matrix


def consistency_basis(family: ProtocolFamily) -> MeasurementBasis:
    _require_minimal(family)
    r = 1.0 / math.sqrt(2.0)
    vectors = np.array([[r, r], [r, -r]], dtype=np.complex128)
    zero, one = family.basis_states()
    psi0, psi1 = build_canonical(family)[:2]
    tests = []
    for j in range(2):
        e = vectors[:, j]
        w0 = np.linalg.norm(conditional_b_vector(zero, e)) ** 2
        w1 = np.linalg.norm(conditional_b_vector(one, e)) ** 2
        if abs(w0 - w1) > 1e-12:
            raise ArithmeticError(f"outcome {j}: unequal code-space overlaps {w0} vs {w1}")
        pair = []
        for psi in (psi0, psi1):
            phi = conditional_b_vector(psi, e)
            phi = phi / np.linalg.norm(phi)
            pair.append(np.outer(phi, phi.conj()))
        if np.max(np.abs(pair[0] @ pair[1])) > 1e-9:
            raise ArithmeticError(f"outcome {j}: induced Bob states are not orthogonal")
        tests.append(tuple(pair))
    return MeasurementBasis(vectors, tuple(tests))


def _joint_density(state) -> tuple[np.ndarray, tuple[int, int]]:
    if isinstance(state, BipartitePureState):
        return state.density(), (state.dim_a, state.dim_b)
    if isinstance(state, DensityOperator):
        if state.dims is None:
            return state.matrix, (state.dim, 1)
        return state.matrix, state.dims
    raise TypeError(f"unsupported state type {type(state).__name__}")


def _lift(projectors, dims) -> list[np.ndarray]:
    dim_a, dim_b = dims
    out = []
    for p in projectors:
        p = np.asarray(p, dtype=np.complex128)
        if p.shape[0] == dim_a * dim_b:
            out.append(p)
        elif p.shape[0] == dim_a:
            out.append(np.kron(p, np.eye(dim_b)))
        elif dim_a % p.shape[0] == 0:
            # projector acts on the trailing factor of an extended A
            out.append(np.kron(np.kron(np.eye(dim_a // p.shape[0]), p), np.eye(dim_b)))
        else:
            raise ValueError(f"projector of size {p.shape[0]} does not fit dims {dims}")
    return out


def _check_complete(projectors: list[np.ndarray]) -> None:
    n = projectors[0].shape[0]
    total = sum(projectors)
    if np.max(np.abs(total - np.eye(n))) > COMPLETENESS_TOL:
        raise ValueError("projectors do not sum to the identity")
    for i, p in enumerate(projectors):
        for q in projectors[i + 1 :]:
            if np.max(np.abs(p @ q)) > COMPLETENESS_TOL:
                raise ValueError("projectors are not mutually orthogonal")


def _normalise(probs: np.ndarray) -> np.ndarray:
    probs = np.where(probs < PROB_FLOOR, 0.0, probs)
    total = probs.sum()
    if abs(total - 1.0) > COMPLETENESS_TOL:
        raise ValueError(f"Born probabilities sum to {total!r}")
    return probs / total


def born_probabilities(state, projectors) -> np.ndarray:
    rho, dims = _joint_density(state)
    lifted = _lift(projectors, dims)
    _check_complete(lifted)
    return _normalise(np.array([np.trace(p @ rho).real for p in lifted]))


def born_sample(state, projectors, rng: np.random.Generator) -> int:
    """Draw one outcome index with probability Tr(P_i rho).

    Projectors may act on the whole space or on subsystem A alone.
    """
    probs = born_probabilities(state, projectors)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def _cdf(rows: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(rows, axis=-1)
    live = rows.sum(axis=-1) > 0
    cdf[..., -1] = np.where(live, 1.0, 0.0)
    return cdf


def _opening_tables(rho, dims, alice_projectors, bob_tests):
    """Alice outcome probabilities and Bob's conditional outcome probabilities."""
    dim_a, dim_b = dims
    lifted = _lift(alice_projectors, dims)
    _check_complete(lifted)
    first = _normalise(np.array([np.trace(p @ rho).real for p in lifted]))
    second = np.zeros((len(lifted), len(bob_tests[0])))
    for j, p in enumerate(lifted):
        if first[j] == 0.0:
            continue
        sigma = np.einsum("ijik->jk", (p @ rho @ p).reshape(dim_a, dim_b, dim_a, dim_b))
        sigma = sigma / np.trace(sigma).real
        q = np.array([np.trace(t @ sigma).real for t in bob_tests[j]])
        q = np.where(q < PROB_FLOOR, 0.0, q)
        if q.sum() >= 1e-12:
            second[j] = q / q.sum()
    return first, second


def _rng(seed: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return np.random.Generator(np.random.Philox(key=seed))


def _draw(first, second, trials: int, seed: int):
    if trials <= 0:
        raise ValueError("trials must be positive")
    u = _rng(seed).random((trials, 2))
    return _kernels.sample_two_stage(_cdf(first), _cdf(second), u)


@dataclass(frozen=True)
class SimulationStats:
    trials: int
    inconsistencies: int
    empirical_rate: float
    analytic_bound: float
    binomial_3sigma: float
    seed: int
    conditional_fidelity: tuple[float, ...] = ()

    @property
    def passed(self) -> bool:
        return abs(self.empirical_rate - self.analytic_bound) <= self.binomial_3sigma

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _stats(trials, errors, bound, seed, cond=()) -> SimulationStats:
    p = min(max(bound, 0.0), 1.0)
    return SimulationStats(
        trials=trials,
        inconsistencies=int(errors),
        empirical_rate=errors / trials,
        analytic_bound=bound,
        binomial_3sigma=3.0 * math.sqrt(p * (1.0 - p) / trials),
        seed=seed,
        conditional_fidelity=tuple(cond),
    )


@dataclass(frozen=True)
class Transcript:
    strategy: StrategyKind
    committed_bit: int | None
    unveiled_bit: int
    alice_outcome_j: int
    bob_outcome: int | None
    consistent: bool
    seed: int


def _open(family: ProtocolFamily, state, unveil: int, trials: int, seed: int):
    """Alice measures A in the agreed basis, Bob runs the test for ``unveil``.

    Returns (alice outcomes, bob outcomes) where bob outcome 2 is inconclusive.
    """
    basis = consistency_basis(family)
    rho, dims = _joint_density(state)
    first, second = _opening_tables(rho, dims, basis.alice_projectors(), basis.bob_tests)
    return _draw(first, second, trials, seed)


def _check_bit(name: str, b: int) -> None:
    if b not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1")


def run_opening(
    family: ProtocolFamily, state, unveil: int, trials: int, seed: int
) -> SimulationStats:
    """Open ``unveil`` from an arbitrary joint state and count failed tests.

    The analytic reference is 1 - |<psi_unveil|state>|^2 for a pure state and
    0 otherwise.
    """
    _check_bit("unveil", unveil)
    _, bob = _open(family, state, unveil, trials, seed)
    errors = int(np.count_nonzero(bob != unveil))
    honest = build_canonical(family).psi(unveil)
    if isinstance(state, BipartitePureState):
        bound = alice_detection_bound(state, honest)
    else:
        bound = 0.0
    return _stats(trials, errors, bound, seed)


def run_honest(
    family: ProtocolFamily,
    b: int,
    trials: int,
    seed: int,
    mixing: tuple[float, ...] | None = None,
) -> SimulationStats:
    """Honest commit and open of ``b``.

    With ``mixing`` Alice prepares the mixed evidence state chi_b carrying
    those label weights instead of |psi_b>.
    """
    _check_bit("b", b)
    _require_minimal(family)
    if mixing is None:
        state = build_canonical(family).psi(b)
    else:
        state = build_evidence_states(family, mixing, mixing)[b]
    _, bob = _open(family, state, b, trials, seed)
    return _stats(trials, np.count_nonzero(bob != b), 0.0, seed)


def conditional_fidelities(family: ProtocolFamily, fake: BipartitePureState, unveil: int):
    """Per-outcome |<honest B state|fake B state>|^2 after Alice's projection."""
    basis = consistency_basis(family)
    honest = build_canonical(family).psi(unveil)
    out = []
    for j in range(basis.vectors.shape[1]):
        e = basis.vectors[:, j]
        a = conditional_b_vector(honest, e)
        f = conditional_b_vector(fake, e)
        na, nf = np.linalg.norm(a), np.linalg.norm(f)
        out.append(0.0 if na < 1e-12 or nf < 1e-12 else float(abs(np.vdot(a, f)) ** 2 / (na * nf) ** 2))
    return out


def run_cheat(
    family: ProtocolFamily, plan: CheatPlan, unveil: int, trials: int, seed: int
) -> SimulationStats:
    _check_bit("unveil", unveil)
    _require_minimal(family)
    fake = plan.fake_states[unveil]
    honest = build_canonical(family).psi(unveil)
    _, bob = _open(family, fake, unveil, trials, seed)
    errors = int(np.count_nonzero(bob != unveil))
    return _stats(
        trials,
        errors,
        alice_detection_bound(fake, honest),
        seed,
        conditional_fidelities(family, fake, unveil),
    )


def transcripts(
    family: ProtocolFamily,
    strategy: StrategyKind,
    state,
    unveil: int,
    trials: int,
    seed: int,
    committed_bit: int | None = None,
) -> list[Transcript]:
    """Per-trial records; same draws as the aggregate runs with this seed."""
    alice, bob = _open(family, state, unveil, trials, seed)
    return [
        Transcript(
            strategy=strategy,
            committed_bit=committed_bit,
            unveiled_bit=unveil,
            alice_outcome_j=int(j),
            bob_outcome=None if k >= 2 else int(k),
            consistent=bool(k == unveil),
            seed=seed,
        )
        for j, k in zip(alice, bob)
    ]


def run_bob_attack(family: ProtocolFamily, trials: int, seed: int) -> SimulationStats:
    """Bob measures block membership and guesses the likelier bit.

    Ties go to 0. The analytic reference is the minimum error probability.
    """
    states = build_canonical(family)
    p0 = family.block_projector(0)
    tests = (p0, np.eye(family.dim_b) - p0)
    second = np.array(
        [[np.trace(t @ states.rho(b).matrix).real for t in tests] for b in (0, 1)]
    )
    second = np.where(second < PROB_FLOOR, 0.0, second)
    second /= second.sum(axis=1, keepdims=True)
    guess = np.where(second[1] > second[0], 1, 0)
    bits, outcomes = _draw(np.array([0.5, 0.5]), second, trials, seed)
    errors = int(np.count_nonzero(guess[outcomes] != bits))
    return _stats(trials, errors, bob_error(states.rho0, states.rho1), seed)
