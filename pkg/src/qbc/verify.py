"""Invariant suite behind ``qbc verify``.

Each check returns a :class:`CheckResult` with the worst residual it saw.
Monte Carlo checks use modest trial counts so the whole suite runs in a few
seconds; the pytest acceptance module runs the full-size versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from qbc import linalg, measures, protocol, states, strategies


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<44} residual={self.residual:.3e}  tol={self.tolerance:.1e}"


def _le(name: str, residual: float, tol: float) -> CheckResult:
    return CheckResult(name, float(residual), tol, bool(residual <= tol))


def theta_grid(n: int = 50) -> np.ndarray:
    return np.linspace(0.0, math.pi / 4, n)


def random_spectrum(rng: np.random.Generator, max_rank: int = 3) -> tuple[float, ...]:
    r = int(rng.integers(1, max_rank + 1))
    w = rng.random(r) + 0.05
    w = w / w.sum()
    w[-1] = 1.0 - w[:-1].sum()
    return tuple(float(x) for x in w)


def check_partial_trace(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        da, db = rng.integers(1, 5, size=2)
        h = linalg.random_hermitian(da * db, rng)
        for over in ("A", "B"):
            red = linalg.partial_trace(h, da, db, over)
            worst = max(worst, abs(np.trace(red) - np.trace(h)))
    return _le("linalg: partial trace preserves trace", worst, 1e-10)


def check_tensor_roundtrip(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        da, db = rng.integers(1, 5, size=2)
        ra, rb = linalg.random_density(da, rng), linalg.random_density(db, rng)
        red = linalg.partial_trace(linalg.tensor_product(ra, rb), da, db, "A")
        worst = max(worst, np.max(np.abs(red - rb)))
    return _le("linalg: Tr_A(rhoA x rhoB) = rhoB", worst, 1e-10)


def check_psd_sqrt(rng) -> CheckResult:
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 7))
        m = linalg.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        r = linalg.psd_sqrt(m)
        worst = max(worst, np.max(np.abs(r @ r - m)))
    return _le("linalg: psd_sqrt squares back", worst, 1e-9)


def check_eig(rng) -> CheckResult:
    worst = 0.0
    for _ in range(50):
        h = linalg.random_hermitian(int(rng.integers(1, 8)), rng)
        s1, s2 = linalg.hermitian_eig(h), linalg.hermitian_eig(h)
        if not (np.array_equal(s1.eigenvalues, s2.eigenvalues)
                and np.array_equal(s1.eigenvectors, s2.eigenvectors)):
            worst = math.inf
        v = s1.eigenvectors
        worst = max(worst, np.max(np.abs(s1.reconstruct() - h)),
                    np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))))
    return _le("linalg: eig reconstruction/determinism", worst, 1e-9)


def check_marginals(rng, thetas) -> CheckResult:
    worst = 0.0
    for th in thetas:
        fam = states.ProtocolFamily.with_spectra(th, random_spectrum(rng), random_spectrum(rng))
        st = states.build_canonical(fam)
        c2, s2 = math.cos(th) ** 2, math.sin(th) ** 2
        h0, h1 = fam.hat_rho(0), fam.hat_rho(1)
        worst = max(
            worst,
            np.max(np.abs(st.rho0.matrix - (c2 * h0 + s2 * h1))),
            np.max(np.abs(st.rho1.matrix - (s2 * h0 + c2 * h1))),
            abs(st.psi0.overlap(st.psi1)),
            np.max(np.abs(h0 @ h1)),
        )
    return _le("states: marginals mix the blocks by cos^2/sin^2", worst, 1e-9)


def check_schmidt_purify(rng) -> CheckResult:
    worst = 0.0
    for _ in range(30):
        d = int(rng.integers(1, 5))
        rho = states.DensityOperator(linalg.random_density(d, rng, rank=int(rng.integers(1, d + 1))))
        sf = states.schmidt_decompose(states.purify(rho, d))
        lam = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
        lam = lam[lam >= 1e-12]
        worst = max(worst, np.max(np.abs(sf.coefficients - np.sqrt(lam))))
    return _le("states: Schmidt(purify(rho)) = sqrt(eig rho)", worst, 1e-9)


def check_orthogonal_purifications(rng) -> CheckResult:
    worst = 0.0
    for k in range(20):
        r0, r1 = (int(x) for x in rng.integers(1, 4, size=2))
        chi0, chi1 = states.random_classical_pair(rng, r0, r1, degenerate=bool(k % 3 == 0))
        p0, p1 = states.orthogonal_purifications(chi0, chi1)
        worst = max(worst, abs(p0.overlap(p1)))
        for chi, p in ((chi0, p0), (chi1, p1)):
            worst = max(worst, np.max(np.abs(p.marginal_b() - chi.marginal("B").matrix)))
            spec = linalg.hermitian_eig(chi.matrix)
            sup = spec.eigenvectors[:, spec.eigenvalues > 1e-12]
            worst = max(worst, abs(1.0 - np.linalg.norm(sup.conj().T @ p.amplitudes)))
    return _le("states: orthogonal purifications", worst, 1e-9)


def check_closed_forms(rng, thetas) -> list[CheckResult]:
    f_res = b_res = fd_res = hk_res = 0.0
    for th in thetas:
        for _ in range(10):
            fam = states.ProtocolFamily.with_spectra(th, random_spectrum(rng), random_spectrum(rng))
            st = states.build_canonical(fam)
            f = measures.fidelity(st.rho0, st.rho1)
            d = measures.distinguishability(st.rho0, st.rho1)
            f_res = max(f_res, abs(f - abs(math.sin(2 * th))))
            b_res = max(b_res, abs(measures.bob_error(st.rho0, st.rho1)
                                   - (1 - abs(math.cos(2 * th))) / 2))
            fd_res = max(fd_res, abs(f * f + d * d - 1))
            for bit in (0, 1):
                hk_res = max(hk_res, abs(measures.hk_error_via_average(st.rho0, st.rho1, bit)
                                         - (1 - f) / 2))
    return [
        _le("measures: general F = |sin 2theta|", f_res, 1e-8),
        _le("measures: Helstrom error closed form", b_res, 1e-8),
        _le("measures: F^2 + D^2 = 1", fd_res, 1e-9),
        _le("measures: HK error via averaged state", hk_res, 1e-8),
    ]


def check_tradeoff(thetas, spectra=((1.0,), (1.0,))) -> list[CheckResult]:
    excess = ent_res = alice_excess = 0.0
    pure = spectra == ((1.0,), (1.0,))
    for th in thetas:
        rep = measures.report(states.ProtocolFamily.with_spectra(th, *spectra))
        excess = max(excess, rep.bob_info + rep.hk_info - 1)
        if rep.mayers_info is not None:
            excess = max(excess, rep.bob_info + rep.mayers_info - 1)
            alice_excess = max(alice_excess, rep.mayers_info - rep.entanglement)
        alice_excess = max(alice_excess, rep.hk_info - rep.entanglement)
        gap = rep.entanglement - (1 - rep.bob_info)
        ent_res = max(ent_res, abs(gap) if pure else -gap)
    label = "pure" if pure else "mixed"
    return [
        _le(f"measures: I_bob + I_alice <= 1 ({label})", max(excess, 0.0), 1e-9),
        _le(f"measures: entanglement vs 1 - I_bob ({label})", max(ent_res, 0.0), 1e-9),
        _le(f"measures: I_alice <= entanglement ({label})", max(alice_excess, 0.0), 1e-9),
    ]


def check_monotone() -> CheckResult:
    fs = np.linspace(0.01, 0.99, 99)
    bob = [1 - measures.binary_entropy((1 - math.sqrt(1 - f * f)) / 2) for f in fs]
    hk = [measures.hk_information_from_fidelity(f) for f in fs]
    # largest step in the wrong direction; negative means strictly monotone
    worst = max(np.max(np.diff(bob)), np.max(-np.diff(hk)))
    return CheckResult("measures: I_bob down, I_hk up in F", max(worst, 0.0), 0.0, bool(worst < 0))


def check_plans(thetas) -> list[CheckResult]:
    conceal = sat = sym = uni = 0.0
    for th in thetas:
        fam = states.ProtocolFamily(th)
        st = states.build_canonical(fam)
        f = measures.fidelity(st.rho0, st.rho1)
        for ev in (0, 1):
            plan = strategies.mayers_plan(fam, ev)
            flip = 1 - ev
            sat = max(sat, abs(abs(st.psi(flip).overlap(plan.fake_states[flip])) - f))
            sat = max(sat, strategies.alice_detection_bound(plan.fake_states[ev], st.psi(ev)))
            for fake in plan.fake_states:
                conceal = max(conceal, np.max(np.abs(fake.marginal_b() - plan.initial_state.marginal_b())))
                u = strategies.switching_unitary(plan.initial_state, fake)
                uni = max(uni, np.max(np.abs(u.conj().T @ u - np.eye(2))),
                          1 - abs(plan.initial_state.apply_a(u).overlap(fake)))
        hk = strategies.hk_plan(fam)
        target = math.sqrt((1 + f) / 2)
        bounds = []
        for b in (0, 1):
            sat = max(sat, abs(abs(st.psi(b).overlap(hk.fake_states[b])) - target))
            bounds.append(strategies.alice_detection_bound(hk.fake_states[b], st.psi(b)))
            conceal = max(conceal, np.max(np.abs(hk.fake_states[b].marginal_b() - hk.initial_state.marginal_b())))
        sym = max(sym, abs(bounds[0] - bounds[1]))
    return [
        _le("strategies: fakes keep Bob's marginal", conceal, 1e-9),
        _le("strategies: fakes saturate overlap bounds", sat, 1e-9),
        _le("strategies: HK bound symmetric in unveil bit", sym, 1e-12),
        _le("strategies: switching unitary exact", uni, 1e-9),
    ]


def check_simulation(seed: int, thetas, trials: int = 20_000) -> list[CheckResult]:
    honest = 0
    worst_m = worst_hk = worst_bob = 0.0
    for i, th in enumerate(thetas):
        fam = states.ProtocolFamily(th)
        for b in (0, 1):
            honest += protocol.run_honest(fam, b, trials, seed + i).inconsistencies
            honest += protocol.run_honest(fam, b, trials, seed + i, mixing=(0.5, 0.5)).inconsistencies
        m = protocol.run_cheat(fam, strategies.mayers_plan(fam, 0), 1, trials, seed + 100 + i)
        worst_m = max(worst_m, _sigma_excess(m))
        honest += protocol.run_cheat(fam, strategies.mayers_plan(fam, 0), 0, trials, seed + i).inconsistencies
        hk = strategies.hk_plan(fam)
        for b in (0, 1):
            worst_hk = max(worst_hk, _sigma_excess(protocol.run_cheat(fam, hk, b, trials, seed + 200 + 2 * i + b)))
        worst_bob = max(worst_bob, _sigma_excess(protocol.run_bob_attack(fam, trials, seed + 300 + i)))
    a = protocol.run_cheat(states.ProtocolFamily(math.pi / 8), strategies.hk_plan(states.ProtocolFamily(math.pi / 8)), 0, 1000, seed)
    b = protocol.run_cheat(states.ProtocolFamily(math.pi / 8), strategies.hk_plan(states.ProtocolFamily(math.pi / 8)), 0, 1000, seed)
    return [
        _le("protocol: honest opens never fail", float(honest), 0.0),
        _le("protocol: Mayers flip rate (in 3-sigma units)", worst_m, 1.0),
        _le("protocol: HK rates (in 3-sigma units)", worst_hk, 1.0),
        _le("protocol: Bob attack rate (in 3-sigma units)", worst_bob, 1.0),
        _le("protocol: seeded runs reproduce", 0.0 if a == b else 1.0, 0.0),
    ]


def _sigma_excess(s: protocol.SimulationStats) -> float:
    """|empirical - analytic| measured in units of the 3-sigma band."""
    diff = abs(s.empirical_rate - s.analytic_bound)
    if s.binomial_3sigma == 0:
        return 0.0 if diff == 0 else math.inf
    return diff / s.binomial_3sigma


def run_all(seed: int = 12345, extra_thetas: Iterable[float] = ()) -> list[CheckResult]:
    extra = [float(t) for t in extra_thetas]
    for t in extra:
        states.ProtocolFamily(t)  # rejects out-of-range angles
    rng = np.random.default_rng(seed)
    grid = np.concatenate([theta_grid(50), extra])
    sim_grid = np.concatenate([theta_grid(6), extra])
    checks: list[Callable[[], CheckResult | list[CheckResult]]] = [
        lambda: check_partial_trace(rng),
        lambda: check_tensor_roundtrip(rng),
        lambda: check_psd_sqrt(rng),
        lambda: check_eig(rng),
        lambda: check_marginals(rng, grid),
        lambda: check_schmidt_purify(rng),
        lambda: check_orthogonal_purifications(rng),
        lambda: check_closed_forms(rng, grid),
        lambda: check_tradeoff(grid),
        lambda: check_tradeoff(grid, ((0.5, 0.5), (0.5, 0.5))),
        check_monotone,
        lambda: check_plans(grid),
        lambda: check_simulation(seed, sim_grid),
    ]
    out: list[CheckResult] = []
    for c in checks:
        r = c()
        out.extend(r if isinstance(r, list) else [r])
    return out
