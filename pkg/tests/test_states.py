import math

import numpy as np
import pytest

from qbc import linalg
from qbc.states import (
    BipartitePureState,
    DensityOperator,
    ProtocolFamily,
    StructureError,
    build_canonical,
    build_evidence_states,
    orthogonal_purifications,
    purify,
    random_classical_pair,
    schmidt_decompose,
)
from qbc.linalg import DimensionError

PI8 = math.pi / 8


def test_family_validation():
    with pytest.raises(ValueError):
        ProtocolFamily(1.0)
    with pytest.raises(ValueError):
        ProtocolFamily(0.1, spectrum0=(0.5, 0.4))
    with pytest.raises(ValueError):
        ProtocolFamily(0.1, spectrum0=(0.5, 0.5), dim_b=2)
    assert ProtocolFamily.minimal(0.2).is_minimal
    assert ProtocolFamily.from_fidelity(1.0).theta == pytest.approx(math.pi / 4)


def test_theta_zero_decouples():
    st = build_canonical(ProtocolFamily(0.0))
    assert np.allclose(st.psi0.amplitudes, [1, 0, 0, 0])
    assert np.allclose(st.rho0.matrix, np.diag([1, 0]))
    assert np.max(np.abs(st.rho0.matrix @ st.rho1.matrix)) == 0


def test_theta_pi4_marginals_coincide():
    fam = ProtocolFamily(math.pi / 4)
    st = build_canonical(fam)
    avg = (fam.hat_rho(0) + fam.hat_rho(1)) / 2
    assert np.allclose(st.rho0.matrix, avg, atol=1e-15)
    assert np.allclose(st.rho1.matrix, avg, atol=1e-15)


def test_mixed_block_spectrum():
    fam = ProtocolFamily.with_spectra(PI8, (0.5, 0.5), (1.0,))
    st = build_canonical(fam)
    w = np.sort(np.linalg.eigvalsh(st.rho0.matrix))[::-1]
    # eigendecomposition oracle: cos^2/2 twice and sin^2 once
    assert np.allclose(w, [0.4267766952966369, 0.4267766952966369, 0.1464466094067262], atol=1e-12)


def test_canonical_posts(rng):
    for th in np.linspace(0, math.pi / 4, 50):
        fam = ProtocolFamily.with_spectra(th, (0.7, 0.3), (0.2, 0.5, 0.3))
        st = build_canonical(fam)
        c2, s2 = math.cos(th) ** 2, math.sin(th) ** 2
        assert abs(st.psi0.overlap(st.psi1)) < 1e-10
        assert np.max(np.abs(st.rho0.matrix - (c2 * fam.hat_rho(0) + s2 * fam.hat_rho(1)))) < 1e-9
        assert np.max(np.abs(st.rho1.matrix - (s2 * fam.hat_rho(0) + c2 * fam.hat_rho(1)))) < 1e-9
        assert np.max(np.abs(fam.hat_rho(0) @ fam.hat_rho(1))) == 0


def test_canonical_rejects_small_dim_a():
    fam = ProtocolFamily(0.3, (0.5, 0.5), (1.0,), dim_a=2, dim_b=3)
    with pytest.raises(DimensionError, match="dim_a >= 3"):
        build_canonical(fam)


def test_schmidt_examples():
    prod = BipartitePureState(2, 3, np.kron([0.6, 0.8], [0, 1, 0]))
    assert np.allclose(schmidt_decompose(prod).coefficients, [1.0])
    bell = BipartitePureState(2, 2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert np.allclose(schmidt_decompose(bell).coefficients, [2 ** -0.5] * 2)
    psi0 = build_canonical(ProtocolFamily(PI8)).psi0
    sf = schmidt_decompose(psi0)
    # singular-value oracle
    assert np.allclose(sf.coefficients, np.linalg.svd(psi0.coefficient_matrix, compute_uv=False))
    assert np.allclose(sf.coefficients, [0.9238795325112867, 0.3826834323650898], atol=1e-12)


def test_schmidt_invariants(rng):
    for _ in range(30):
        da, db = rng.integers(1, 5, size=2)
        v = rng.normal(size=da * db) + 1j * rng.normal(size=da * db)
        state = BipartitePureState(int(da), int(db), v / np.linalg.norm(v))
        sf = schmidt_decompose(state)
        assert abs(np.sum(sf.coefficients ** 2) - 1) < 1e-10
        assert np.all(np.diff(sf.coefficients) <= 0) and np.all(sf.coefficients > 0)
        assert abs(np.vdot(sf.reconstruct(), state.amplitudes)) > 1 - 1e-9
        assert np.allclose(sf.basis_a.conj().T @ sf.basis_a, np.eye(sf.coefficients.size))
        assert np.allclose(sf.basis_b.conj().T @ sf.basis_b, np.eye(sf.coefficients.size))


def test_purify_examples():
    v = np.array([0.6, 0.8j])
    p = purify(DensityOperator(np.outer(v, v.conj())), 2)
    assert np.allclose(p.coefficient_matrix[0], linalg._phase_fix(v))
    assert np.allclose(p.coefficient_matrix[1], 0)
    bell = purify(DensityOperator(np.eye(2) / 2), 2)
    assert np.allclose(bell.marginal_b(), np.eye(2) / 2)
    assert np.allclose(schmidt_decompose(bell).coefficients, [2 ** -0.5] * 2)
    st = build_canonical(ProtocolFamily(PI8))
    pb = purify(st.rho_bar, 2)
    assert np.max(np.abs(pb.marginal_b() - st.rho_bar.matrix)) < 1e-9


def test_purify_schmidt_roundtrip(rng):
    for _ in range(30):
        d = int(rng.integers(1, 5))
        rho = DensityOperator(linalg.random_density(d, rng, rank=int(rng.integers(1, d + 1))))
        p = purify(rho, d + 1)
        assert np.max(np.abs(p.marginal_b() - rho.matrix)) < 1e-9
        lam = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
        lam = lam[lam >= 1e-12]
        assert np.allclose(schmidt_decompose(p).coefficients, np.sqrt(lam), atol=1e-9)


def test_purify_rejects_small_dim(rng):
    with pytest.raises(DimensionError):
        purify(DensityOperator(linalg.random_density(3, rng)), 2)


def test_evidence_states_examples():
    fam = ProtocolFamily(PI8)
    st = build_canonical(fam)
    chi0, chi1 = build_evidence_states(fam, [1.0], [1.0])
    assert np.allclose(chi0.matrix, st.psi0.density())
    assert np.allclose(chi1.matrix, st.psi1.density())
    chi0, chi1 = build_evidence_states(fam, [0.5, 0.5], [0.5, 0.5])
    assert np.linalg.matrix_rank(chi0.matrix, tol=1e-10) == 2
    assert chi0.purity() == pytest.approx(0.5, abs=1e-12)
    assert np.trace(chi0.marginal("B").matrix).real == pytest.approx(1.0)
    assert np.max(np.abs(chi0.matrix @ chi1.matrix)) < 1e-10
    assert np.max(np.abs(chi0.marginal("B").matrix - st.rho0.matrix)) < 1e-10
    with pytest.raises(DimensionError):
        build_evidence_states(fam, [0.5, 0.5], [1.0], dim_a=2)


def test_orthogonal_purifications_rank_one():
    st = build_canonical(ProtocolFamily(PI8))
    p0, p1 = orthogonal_purifications(st.psi0.as_density(), st.psi1.as_density())
    assert abs(abs(p0.overlap(st.psi0)) - 1) < 1e-12
    assert abs(abs(p1.overlap(st.psi1)) - 1) < 1e-12


def test_orthogonal_purifications_from_evidence():
    fam = ProtocolFamily(PI8)
    chi0, chi1 = build_evidence_states(fam, [0.5, 0.5], [0.5, 0.5])
    p0, p1 = orthogonal_purifications(chi0, chi1)
    assert abs(p0.overlap(p1)) < 1e-9
    assert np.max(np.abs(p0.marginal_b() - chi0.marginal("B").matrix)) < 1e-9
    assert np.max(np.abs(p1.marginal_b() - chi1.marginal("B").matrix)) < 1e-9


def test_orthogonal_purifications_stay_in_support(rng):
    for k in range(10):
        chi0, chi1 = random_classical_pair(rng, 2, 3, degenerate=bool(k % 2))
        for chi, p in zip((chi0, chi1), orthogonal_purifications(chi0, chi1)):
            spec = linalg.hermitian_eig(chi.matrix)
            sup = spec.eigenvectors[:, spec.eigenvalues > 1e-12]
            assert abs(np.linalg.norm(sup.conj().T @ p.amplitudes) - 1) < 1e-9


def test_orthogonal_purifications_rejections():
    st = build_canonical(ProtocolFamily(PI8))
    chi = st.psi0.as_density()
    with pytest.raises(StructureError, match="not orthogonal"):
        orthogonal_purifications(chi, chi)
    # |00><00|/2 + |11><11|/2 and a degenerate eigenspace spanned by
    # entangled vectors sharing A-support must be rejected
    phi_p = np.array([1, 0, 0, 1]) / math.sqrt(2)
    phi_m = np.array([0, 1, 1, 0]) / math.sqrt(2)
    bad0 = DensityOperator(0.7 * np.outer(phi_p, phi_p) + 0.3 * np.outer(phi_m, phi_m), "AB", (2, 2))
    psi_m = np.array([1, 0, 0, -1]) / math.sqrt(2)
    bad1 = DensityOperator(np.outer(psi_m, psi_m), "AB", (2, 2))
    with pytest.raises(StructureError, match="share A-support"):
        orthogonal_purifications(bad0, bad1)
