import numpy as np
import pytest

from chansim import linalg_core as la
from chansim.errors import DimensionMismatch, NotHermitian, NotPSD
from chansim.randoms import ginibre


def test_hermitian_eig_diagonal():
    res = la.hermitian_eig(np.diag([3.0, 1.0]).astype(complex))
    assert np.allclose(res.eigenvalues, [3.0, 1.0])
    assert np.allclose(res.eigenvectors, np.eye(2))


def test_hermitian_eig_identity():
    res = la.hermitian_eig(np.eye(4, dtype=complex))
    assert np.allclose(res.eigenvalues, np.ones(4))


def test_hermitian_eig_pauli_x():
    # hand diagonalization: X = |+><+| - |-><-|
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    res = la.hermitian_eig(x)
    assert np.allclose(res.eigenvalues, [1.0, -1.0])
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    minus = np.array([1.0, -1.0]) / np.sqrt(2)
    assert min(np.linalg.norm(res.eigenvectors[:, 0] - plus),
               np.linalg.norm(res.eigenvectors[:, 0] + plus)) < 1e-12
    assert min(np.linalg.norm(res.eigenvectors[:, 1] - minus),
               np.linalg.norm(res.eigenvectors[:, 1] + minus)) < 1e-12


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("d", [2, 3, 5, 8, 16])
def test_hermitian_eig_reconstruction_vs_lapack(seed, d):
    rng = np.random.default_rng(seed)
    m = ginibre(rng, d, d)
    m = 0.5 * (m + m.conj().T)
    res = la.hermitian_eig(m)
    w, v = res
    nrm = max(1.0, np.linalg.norm(m))
    assert np.linalg.norm((v * w) @ v.conj().T - m) <= 1e-10 * nrm
    assert np.linalg.norm(v.conj().T @ v - np.eye(d)) <= 1e-10
    # independent oracle: LAPACK eigenvalues
    ref = np.sort(np.linalg.eigvalsh(m))[::-1]
    assert np.max(np.abs(w - ref)) < 1e-10 * nrm
    assert np.all(np.diff(w) <= 1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        la.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


def test_matrix_sqrt_diagonal():
    assert np.allclose(la.matrix_sqrt_psd(np.diag([4.0, 9.0]).astype(complex)), np.diag([2.0, 3.0]))
    assert np.allclose(la.matrix_sqrt_psd(np.zeros((3, 3), dtype=complex)), 0.0)


def test_matrix_sqrt_square_and_compare():
    m = 0.5 * np.ones((2, 2), dtype=complex)
    root = la.matrix_sqrt_psd(m)
    assert np.linalg.norm(root @ root - m) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_matrix_sqrt_random_psd(seed):
    rng = np.random.default_rng(seed)
    g = ginibre(rng, 4, 4)
    m = g @ g.conj().T
    root = la.matrix_sqrt_psd(m)
    assert np.linalg.norm(root @ root - m) <= 1e-8 * max(1.0, np.linalg.norm(m))


def test_matrix_sqrt_rejects_negative():
    with pytest.raises(NotPSD):
        la.matrix_sqrt_psd(np.diag([1.0, -0.5]).astype(complex))


def test_polar_identity_and_singular_diagonal():
    u, p = la.polar_decompose(np.eye(3, dtype=complex))
    assert np.allclose(u, np.eye(3)) and np.allclose(p, np.eye(3))
    u, p = la.polar_decompose(np.diag([2.0, 0.0]).astype(complex))
    assert np.allclose(p, np.diag([2.0, 0.0]))
    # the deterministic completion fixes the unitary part to the identity
    assert np.allclose(u, np.eye(2))


@pytest.mark.parametrize("seed", range(6))
def test_polar_property_random(seed):
    rng = np.random.default_rng(seed)
    m = ginibre(rng, 2, 2)
    u, p = la.polar_decompose(m)
    assert np.linalg.norm(u @ p - m) <= 1e-9 * max(1.0, np.linalg.norm(m))
    assert np.linalg.norm(u.conj().T @ u - np.eye(2)) <= 1e-9
    assert np.linalg.norm(p - la.matrix_sqrt_psd(m.conj().T @ m)) <= 1e-9


def test_polar_deterministic():
    rng = np.random.default_rng(3)
    m = ginibre(rng, 3, 3)
    m[:, 0] = 0.0  # singular
    u1, p1 = la.polar_decompose(m)
    u2, p2 = la.polar_decompose(m.copy())
    assert np.array_equal(u1, u2) and np.array_equal(p1, p2)


def test_trace_norm_examples():
    assert la.trace_norm(np.diag([1.0, -2.0]).astype(complex)).value == pytest.approx(3.0)
    # unitary d x d -> d
    rng = np.random.default_rng(0)
    from chansim.randoms import random_unitary

    u = random_unitary(rng, 4)
    assert la.trace_norm(u).value == pytest.approx(4.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
def test_trace_norm_vs_abs_trace(seed):
    rng = np.random.default_rng(seed)
    m = ginibre(rng, 3, 3)
    val = la.trace_norm(m).value
    assert val >= abs(np.trace(m)) - 1e-10
    # equality iff PSD
    g = ginibre(rng, 3, 3)
    psd = g @ g.conj().T
    assert la.trace_norm(psd).value == pytest.approx(abs(np.trace(psd)), abs=1e-9)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 4)])
def test_trace_norm_maximizer_contract(seed, shape):
    rng = np.random.default_rng(seed)
    m = ginibre(rng, *shape)
    val, a = la.trace_norm(m)
    assert np.linalg.norm(a, 2) <= 1.0 + 1e-9
    assert np.real(np.trace(a @ m.conj().T)) == pytest.approx(val, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_trace_norm_is_a_norm(seed):
    rng = np.random.default_rng(seed)
    a = ginibre(rng, 3, 3)
    b = ginibre(rng, 3, 3)
    ta, tb = la.trace_norm(a).value, la.trace_norm(b).value
    assert la.trace_norm(a + b).value <= ta + tb + 1e-10
    z = rng.normal() + 1j * rng.normal()
    assert la.trace_norm(z * a).value == pytest.approx(abs(z) * ta, rel=1e-10)


def test_partial_trace_product_and_bell():
    rng = np.random.default_rng(1)
    from chansim.randoms import random_density

    rho = random_density(rng, 2)
    sig = random_density(rng, 3)
    prod = np.kron(rho, sig)
    assert np.linalg.norm(la.partial_trace(prod, "first", (2, 3)) - rho) < 1e-12
    assert np.linalg.norm(la.partial_trace(prod, "second", (2, 3)) - sig) < 1e-12
    # Bell state, against a direct index-contraction oracle
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / np.sqrt(2)
    rb = np.outer(bell, bell.conj())
    oracle = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for c in range(2):
            for b in range(2):
                oracle[a, c] += rb[a * 2 + b, c * 2 + b]
    got = la.partial_trace(rb, "first", (2, 2))
    assert np.linalg.norm(got - oracle) < 1e-14
    assert np.allclose(got, np.eye(2) / 2)
    assert np.allclose(la.partial_trace(np.eye(4, dtype=complex), "second", (2, 2)), 2 * np.eye(2))
    with pytest.raises(DimensionMismatch):
        la.partial_trace(np.eye(5, dtype=complex), "first", (2, 2))


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(7)
    from chansim.randoms import random_density

    rho = random_density(rng, 6)
    for keep in ("first", "second"):
        out = la.partial_trace(rho, keep, (2, 3))
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)


def test_tensor():
    assert np.allclose(la.tensor(np.eye(2, dtype=complex), np.eye(2, dtype=complex)), np.eye(4))
    e0 = np.diag([1.0, 0.0]).astype(complex)
    e1 = np.diag([0.0, 1.0]).astype(complex)
    t = la.tensor(e0, e1)
    expect = np.zeros((4, 4))
    expect[1, 1] = 1.0
    assert np.allclose(t, expect)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    xz = la.tensor(x, z)
    assert np.allclose(xz @ xz, np.eye(4))


def test_tensor_mixed_product_rule():
    rng = np.random.default_rng(2)
    a, b, c, d = (ginibre(rng, 2, 2) for _ in range(4))
    lhs = la.tensor(a, b) @ la.tensor(c, d)
    rhs = la.tensor(a @ c, b @ d)
    assert np.linalg.norm(lhs - rhs) < 1e-12


def test_pseudo_inverse_sqrt():
    r, k = la.pseudo_inverse_sqrt(np.diag([4.0, 0.0]).astype(complex), 1e-10)
    assert np.allclose(r, np.diag([0.5, 0.0]))
    assert np.allclose(k, np.diag([0.0, 1.0]))
    r, k = la.pseudo_inverse_sqrt(np.eye(3, dtype=complex))
    assert np.allclose(r, np.eye(3)) and np.allclose(k, 0.0)
    with pytest.raises(NotPSD):
        la.pseudo_inverse_sqrt(np.diag([1.0, -1.0]).astype(complex))


@pytest.mark.parametrize("seed", range(4))
def test_pseudo_inverse_sqrt_support(seed):
    rng = np.random.default_rng(seed)
    g = ginibre(rng, 4, 2)
    m = g @ g.conj().T  # rank 2 PSD
    r, k = la.pseudo_inverse_sqrt(m)
    assert np.linalg.norm(m @ r @ r - la.support_projector(m)) <= 1e-8
    assert np.linalg.norm(r @ k) <= 1e-10
