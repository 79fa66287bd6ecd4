import numpy as np
import pytest

from chansim import channels as ch
from chansim.discrimination import ensemble
from chansim.errors import DeskScaleExceeded
from chansim.fidelity import worst_case_fidelity
from chansim.oracles import (
    brute_force_povm_minimax,
    duality_check,
    robustness_check,
    seesaw_max_fidelity,
)
from chansim.randoms import random_kraus_set, random_unitary

from conftest import KET0, KET1, PLUS, counterexample_channel


def test_seesaw_self_target():
    rng = np.random.default_rng(0)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    res = seesaw_max_fidelity(n, n, 4, seed=0, n_starts=6, rounds=14)
    assert res.value == pytest.approx(1.0, abs=1e-6)
    assert res.starts == 6


def test_seesaw_correctable():
    rng = np.random.default_rng(1)
    u = ch.unitary_channel(random_unitary(rng, 2))
    res = seesaw_max_fidelity(u, ch.identity_channel(2), 4, seed=0, n_starts=8, rounds=16)
    assert res.value == pytest.approx(1.0, abs=1e-6)
    # certificate re-evaluates to the reported value
    f = worst_case_fidelity(ch.compose(res.certificate, u), ch.identity_channel(2), seed=11).value
    assert f == pytest.approx(res.value, abs=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_seesaw_brackets_f0(seed):
    from chansim.recovery import SimulationProblem, minimize_f0

    rng = np.random.default_rng(seed + 5)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, int(rng.integers(2, 4))))
    f0 = minimize_f0(SimulationProblem(n)).value
    res = seesaw_max_fidelity(n, ch.identity_channel(2), 8, seed=seed, n_starts=10, rounds=18)
    assert f0 - 1e-4 <= res.value <= 0.25 * f0 + 0.75 + 1e-4


def test_seesaw_budget_monotone():
    rng = np.random.default_rng(9)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    v2 = seesaw_max_fidelity(n, ch.identity_channel(2), 2, seed=0, n_starts=8, rounds=16).value
    v3 = seesaw_max_fidelity(n, ch.identity_channel(2), 3, seed=0, n_starts=8, rounds=16).value
    assert v2 <= v3 + 1e-6


def test_seesaw_desk_scale_guard():
    with pytest.raises(DeskScaleExceeded):
        seesaw_max_fidelity(ch.identity_channel(5), ch.identity_channel(5), 2)


def test_duality_correctable():
    rng = np.random.default_rng(2)
    u = ch.unitary_channel(random_unitary(rng, 2))
    res = duality_check(u, ch.identity_channel(2), 4, seed=0, n_starts=8)
    assert res.primal == pytest.approx(1.0, abs=1e-6)
    assert res.dual == pytest.approx(1.0, abs=1e-6)
    assert res.gap <= 5e-3


def test_duality_counterexample_fixture():
    res = duality_check(counterexample_channel(0.5), ch.identity_channel(2), 6, seed=0, n_starts=10)
    assert res.gap <= 5e-3


def test_duality_desk_scale():
    with pytest.raises(DeskScaleExceeded):
        duality_check(ch.identity_channel(4), ch.identity_channel(4), 2)


def test_robustness_append_ancilla():
    rng = np.random.default_rng(3)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    append = ch.append_state_channel(KET0, 2)
    n_eq = ch.compose(append, n)  # N (x) |0><0| carries the same information
    m = ch.identity_channel(2)
    m_eq = ch.compose(append, m)
    gap = robustness_check(n, n_eq, m, m_eq, kraus_budget=8, seed=0)
    assert gap <= 5e-3


def test_robustness_unitary_rotation():
    rng = np.random.default_rng(4)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    u = ch.unitary_channel(random_unitary(rng, 2))
    gap = robustness_check(n, ch.compose(u, n), ch.identity_channel(2), u, kraus_budget=8, seed=0)
    assert gap <= 5e-3


def test_robustness_identical_inputs():
    rng = np.random.default_rng(5)
    n = ch.KrausChannel(random_kraus_set(rng, 2, 2, 2))
    gap = robustness_check(n, n, ch.identity_channel(2), ch.identity_channel(2), kraus_budget=6, seed=0)
    assert gap == pytest.approx(0.0, abs=1e-12)


def test_povm_orthogonal_pair():
    res = brute_force_povm_minimax(ensemble([KET0, KET1]), n_starts=8)
    assert res.value == pytest.approx(1.0, abs=1e-8)


def test_povm_identical_pair():
    res = brute_force_povm_minimax(ensemble([KET0, KET0]), n_starts=8)
    assert res.value == pytest.approx(0.5, abs=1e-8)


def test_povm_zero_vs_plus():
    # grid and ascent must agree; the prior-minimized two-state value is
    # (1 + sin(pi/4)) / 2 = 0.85355339059327
    res = brute_force_povm_minimax(ensemble([KET0, PLUS]), n_starts=12)
    assert res.value == pytest.approx(0.8535533905932737, abs=1e-4)
    assert res.spread < 0.2
    # certificate re-evaluation
    a = res.certificate
    reval = min(np.real(np.trace(KET0 @ a[0])), np.real(np.trace(PLUS @ a[1])))
    assert reval == pytest.approx(res.value, abs=1e-9)


def test_povm_desk_scale():
    big = [np.eye(4, dtype=complex) / 4 + 0j for _ in range(2)]
    big = [b / np.trace(b).real for b in big]
    with pytest.raises(DeskScaleExceeded):
        brute_force_povm_minimax(ensemble(big))
