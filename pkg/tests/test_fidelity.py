import numpy as np
import pytest

from chansim import channels as ch
from chansim.fidelity import (
    as_density,
    channel_distance,
    entanglement_fidelity,
    fidelity,
    fidelity_at_state,
    purify,
    worst_case_fidelity,
)
from chansim.linalg_core import partial_trace
from chansim.randoms import random_density, random_kraus_set, random_unitary

from conftest import KET0, KET1, counterexample_complementary


def test_fidelity_examples():
    rng = np.random.default_rng(0)
    rho = random_density(rng, 3)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(KET0, KET1) == pytest.approx(0.0, abs=1e-12)
    assert fidelity(KET0, np.eye(2, dtype=complex) / 2) == pytest.approx(np.sqrt(0.5), abs=1e-12)


def test_fidelity_symmetric_and_bounded():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a = random_density(rng, 3)
        b = random_density(rng, 3)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-9)
        assert -1e-12 <= fidelity(a, b) <= 1.0 + 1e-9
    # subnormalized inputs are allowed
    assert fidelity(0.5 * KET0, 0.5 * KET0) == pytest.approx(0.5, abs=1e-12)


def test_purify():
    rng = np.random.default_rng(2)
    # pure input: rank-one vector reproducing the state
    psi = purify(KET0)
    assert np.linalg.norm(np.outer(psi, psi.conj()) - np.kron(KET0, np.outer([1, 0], [1, 0]))) < 1e-12
    # maximally mixed: a Bell-type vector
    bell = purify(np.eye(2, dtype=complex) / 2)
    assert np.allclose(sorted(np.abs(bell)), [0, 0, 1 / np.sqrt(2), 1 / np.sqrt(2)])
    for d in (2, 3, 4):
        rho = random_density(rng, d)
        psi = purify(rho)
        rec = partial_trace(np.outer(psi, psi.conj()), "first", (d, d))
        assert np.linalg.norm(rec - rho) < 1e-10


def test_entanglement_fidelity_examples():
    rng = np.random.default_rng(3)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 3, 2))
    for _ in range(3):
        rho = random_density(rng, 2)
        assert entanglement_fidelity(n, n, rho) == pytest.approx(1.0, abs=5e-8)
    # (1-p) id + p full-dephase at the maximally mixed state: sqrt(1 - p/2),
    # frozen from the direct 4x4 fidelity computation
    p = 0.3
    val = entanglement_fidelity(
        ch.mixed_dephasing_channel(p), ch.identity_channel(2), np.eye(2, dtype=complex) / 2
    )
    assert val == pytest.approx(np.sqrt(1 - p / 2), abs=1e-10)
    assert val == pytest.approx(0.92195444572928871, abs=1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_entanglement_fidelity_purification_independent(seed):
    # the spectral-purification route and the factor-overlap route use
    # different purifications; they must agree
    rng = np.random.default_rng(seed)
    n = ch.KrausChannel(random_kraus_set(rng, 3, 2, 2))
    m = ch.KrausChannel(random_kraus_set(rng, 3, 2, 3))
    rho = random_density(rng, 3)
    # the spectral route loses ~1e-9 on rank-deficient extended states
    # (square roots at zero eigenvalues), so compare at 1e-8
    assert entanglement_fidelity(n, m, rho) == pytest.approx(
        fidelity_at_state(n, m, rho), abs=1e-8
    )


def test_worst_case_examples():
    rng = np.random.default_rng(4)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    assert worst_case_fidelity(n, n, seed=0).value == pytest.approx(1.0, abs=1e-9)
    res = worst_case_fidelity(ch.identity_channel(2), ch.constant_channel(KET0, 2), seed=0)
    assert res.value == pytest.approx(0.0, abs=1e-9)
    # worst input is |1><1|
    assert np.linalg.norm(res.argmin_state.matrix - KET1) < 1e-6


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_worst_case_counterexample_value(s):
    # F^2(N~, N~ M~) = s at the achieving state |1><1|
    nh = counterexample_complementary(s)
    mt = ch.constant_channel(KET0, 2)
    res = worst_case_fidelity(nh, ch.compose(nh, mt), seed=0)
    assert res.value**2 == pytest.approx(s, abs=1e-9)
    assert np.linalg.norm(res.argmin_state.matrix - KET1) < 1e-5


def test_channel_distance():
    rng = np.random.default_rng(5)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    assert channel_distance(n, n, seed=0) == pytest.approx(0.0, abs=1e-4)
    assert channel_distance(ch.identity_channel(2), ch.constant_channel(KET0, 2), seed=0) == pytest.approx(
        1.0, abs=1e-9
    )


@pytest.mark.parametrize("seed", range(3))
def test_distance_triangle(seed):
    rng = np.random.default_rng(seed)
    a = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    b = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    c = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    dab = channel_distance(a, b, seed=seed)
    dbc = channel_distance(b, c, seed=seed)
    dac = channel_distance(a, c, seed=seed)
    assert dac <= dab + dbc + 1e-7


@pytest.mark.parametrize("seed", range(4))
def test_post_composition_monotonicity(seed):
    # d(N . R, M . R) <= d(N, M): composing an input channel only limits
    # the states the worst case ranges over
    rng = np.random.default_rng(seed)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    m = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    r = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    lhs = channel_distance(ch.compose(n, r), ch.compose(m, r), seed=seed)
    rhs = channel_distance(n, m, seed=seed)
    assert lhs <= rhs + 1e-7


@pytest.mark.parametrize("seed", range(3))
def test_worst_case_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    m = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    u = ch.unitary_channel(random_unitary(rng, 2))
    base = worst_case_fidelity(n, m, seed=seed).value
    rotated = worst_case_fidelity(ch.compose(u, n), ch.compose(u, m), seed=seed).value
    assert abs(base - rotated) <= 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_strong_concavity(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 3)
    tau = random_density(rng, 3)
    sig = random_density(rng, 3)
    p = rng.uniform(0.1, 0.9)
    lhs = fidelity(as_density(p * rho + (1 - p) * tau, check=False), sig)
    assert lhs >= np.sqrt(p) * fidelity(rho, sig) - 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_joint_monotonicity_under_channels(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 2)
    sig = random_density(rng, 2)
    e = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    before = fidelity(rho, sig)
    after = fidelity(
        as_density(ch.apply(e, rho), check=False), as_density(ch.apply(e, sig), check=False)
    )
    assert after >= before - 1e-8
