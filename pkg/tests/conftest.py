import numpy as np
import pytest

from chansim import channels as ch
from chansim import fidelity as fi
from chansim import recovery as rc
from chansim.qec import bit_flip_noise, repetition_code


def counterexample_channel(s: float) -> ch.KrausChannel:
    """The 2->3 channel whose complementary is (1-s) id + s |0><0| Tr.

    Its trace-norm objective has the closed form min value sqrt(s), attained
    uniquely at |1><1|, which is rank deficient; the recovery construction
    must abstain on it.
    """
    e0 = np.zeros((3, 2), dtype=np.complex128)
    e0[0, 0] = np.sqrt(1.0 - s)
    e0[1, 0] = np.sqrt(s)
    e0[2, 1] = np.sqrt(s)
    e1 = np.zeros((3, 2), dtype=np.complex128)
    e1[0, 1] = np.sqrt(1.0 - s)
    return ch.KrausChannel([e0, e1], name=f"counterexample_{s}")


def counterexample_problem(s: float) -> rc.SimulationProblem:
    sigma = np.diag([1.0, 0.0]).astype(np.complex128)
    return rc.SimulationProblem(counterexample_channel(s), fi.as_density(sigma))


def counterexample_complementary(s: float) -> ch.KrausChannel:
    """(1-s) id + s |0><0| Tr, written directly in Kraus form."""
    return ch.KrausChannel(
        [
            np.sqrt(1.0 - s) * np.eye(2, dtype=np.complex128),
            np.sqrt(s) * np.array([[1, 0], [0, 0]], dtype=np.complex128),
            np.sqrt(s) * np.array([[0, 1], [0, 0]], dtype=np.complex128),
        ],
        name=f"counterexample_hat_{s}",
    )


@pytest.fixture(scope="session")
def encoded_repetition():
    """Three-qubit repetition code composed with single-location bit flips."""
    code = repetition_code()
    noise = bit_flip_noise(0.1)
    return code, noise, ch.encode_then_noise(code.encoding, noise)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the numba kernels once so timed tests measure compute only."""
    prob = rc.SimulationProblem(ch.identity_channel(2))
    rc.minimize_f0(prob, n_starts=1, max_iter=50)
    fi.worst_case_fidelity(
        ch.identity_channel(2), ch.identity_channel(2), n_random_starts=1, max_iter=20
    )


def proj(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


KET0 = proj([1.0, 0.0])
KET1 = proj([0.0, 1.0])
PLUS = proj([1.0, 1.0])
