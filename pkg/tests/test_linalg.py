import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbc import linalg
from qbc.states import ProtocolFamily, build_canonical

PHI_PLUS = np.array([1, 0, 0, 1]) / np.sqrt(2)


def test_tensor_product_examples():
    assert np.allclose(linalg.tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    assert np.all(linalg.tensor_product(np.zeros((2, 2)), np.ones((3, 3))) == 0)
    # diag(1,0) (x) diag(0,1): only index (0,1) -> 1
    out = linalg.tensor_product(np.diag([1, 0]), np.diag([0, 1]))
    assert np.array_equal(out, np.diag([0, 1, 0, 0]).astype(complex))


def test_partial_trace_examples():
    assert np.allclose(linalg.partial_trace(np.eye(4) / 4, 2, 2, "A"), np.eye(2) / 2)
    assert np.allclose(linalg.partial_trace(linalg.projector(PHI_PLUS), 2, 2, "A"), np.eye(2) / 2)


def test_partial_trace_product_states(rng):
    for _ in range(100):
        da, db = rng.integers(1, 5, size=2)
        ra, rb = linalg.random_density(da, rng), linalg.random_density(db, rng)
        joint = linalg.tensor_product(ra, rb)
        assert np.max(np.abs(linalg.partial_trace(joint, da, db, "A") - rb)) < 1e-10
        assert np.max(np.abs(linalg.partial_trace(joint, da, db, "B") - ra)) < 1e-10


def test_partial_trace_preserves_trace(rng):
    for _ in range(100):
        da, db = rng.integers(1, 5, size=2)
        h = linalg.random_hermitian(da * db, rng)
        assert abs(np.trace(linalg.partial_trace(h, da, db, "A")) - np.trace(h)) < 1e-10


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(linalg.DimensionError):
        linalg.partial_trace(np.eye(4), 2, 3)
    with pytest.raises(ValueError):
        linalg.partial_trace(np.eye(4), 2, 2, over="C")


def test_hermitian_eig_examples():
    assert np.allclose(linalg.hermitian_eig(np.diag([1.0, 3.0])).eigenvalues, [3, 1])
    assert np.allclose(linalg.hermitian_eig(np.eye(5)).eigenvalues, 1)
    # degenerate block gets the standard basis back
    assert np.allclose(linalg.hermitian_eig(np.eye(3)).eigenvectors, np.eye(3))


def test_hermitian_eig_reconstruction(rng):
    for _ in range(20):
        h = linalg.random_hermitian(4, rng)
        spec = linalg.hermitian_eig(h)
        v = spec.eigenvectors
        assert np.all(np.diff(spec.eigenvalues) <= 0)
        assert np.max(np.abs(v.conj().T @ v - np.eye(4))) < 1e-10
        assert np.max(np.abs(spec.reconstruct() - h)) < 1e-9


def test_hermitian_eig_is_deterministic(rng):
    h = linalg.random_hermitian(6, rng)
    a, b = linalg.hermitian_eig(h), linalg.hermitian_eig(h)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_degenerate_basis_ignores_input_rotation(rng):
    # same operator written in two rotated eigenbases must give the same output
    u = linalg.random_unitary(4, rng)
    d = np.diag([0.5, 0.5, 0.0, 0.0])
    h = u @ d @ u.conj().T
    w = np.eye(4, dtype=complex)
    w[:2, :2] = linalg.random_unitary(2, rng)
    h2 = (u @ w) @ d @ (u @ w).conj().T
    a, b = linalg.hermitian_eig(h), linalg.hermitian_eig(h2)
    assert np.allclose(a.eigenvectors[:, :2], b.eigenvectors[:, :2], atol=1e-9)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        linalg.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_psd_sqrt_examples(rng):
    assert np.allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    v = linalg.random_unitary(3, rng)[:, :2]
    p = v @ v.conj().T
    assert np.allclose(linalg.psd_sqrt(p), p, atol=1e-12)
    for _ in range(50):
        m = linalg.random_density(5, rng, rank=int(rng.integers(1, 6)))
        r = linalg.psd_sqrt(m)
        assert np.max(np.abs(r @ r - m)) < 1e-9
        assert np.min(np.linalg.eigvalsh(r)) > -1e-12


def test_psd_sqrt_rejects_negative():
    with pytest.raises(linalg.NotPSDError):
        linalg.psd_sqrt(np.diag([1.0, -1e-6]))
    # tiny negative noise is clamped
    assert np.allclose(linalg.psd_sqrt(np.diag([1.0, -1e-14])), np.diag([1.0, 0.0]))


def test_trace_norm_examples(rng):
    assert linalg.trace_norm(linalg.random_density(4, rng)) == pytest.approx(1.0, abs=1e-12)
    assert linalg.trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)
    st = build_canonical(ProtocolFamily(np.pi / 8))
    # rho0 - rho1 = cos(2 theta) (hat0 - hat1) with unit-trace blocks
    assert linalg.trace_norm(st.rho0.matrix - st.rho1.matrix) == pytest.approx(
        2 * np.cos(np.pi / 4), abs=1e-12
    )
    with pytest.raises(linalg.NotHermitianError):
        linalg.trace_norm(np.array([[0, 1], [0, 0]]))


def test_as_matrix_rejects_nan():
    with pytest.raises(ValueError):
        linalg.as_matrix([[np.nan, 0], [0, 1]])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_partial_traces_are_consistent(da, db, seed):
    r = np.random.default_rng(seed)
    rho = linalg.random_density(da * db, r)
    ra = linalg.partial_trace(rho, da, db, "B")
    rb = linalg.partial_trace(rho, da, db, "A")
    assert abs(np.trace(ra) - 1) < 1e-10 and abs(np.trace(rb) - 1) < 1e-10
    assert linalg.is_hermitian(ra) and linalg.is_hermitian(rb)
