"""Seeded random fixtures: states, unitaries, channels.

Everything is generated through our own polar/eigen routines so results are
bit-reproducible across platforms for a fixed ``numpy.random.Generator``.
"""

import numpy as np

from .linalg_core import polar_isometry


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return polar_isometry(ginibre(rng, d, d))


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    if rows < cols:
        raise ValueError("an isometry needs rows >= cols")
    return polar_isometry(ginibre(rng, rows, cols))


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    r = d if rank is None else rank
    g = ginibre(rng, d, r)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, d: int) -> np.ndarray:
    v = ginibre(rng, d, 1)[:, 0]
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_kraus_set(rng: np.random.Generator, dim_in: int, dim_out: int, n_kraus: int):
    """Kraus operators of a Haar-style random channel (slices of an isometry)."""
    v = random_isometry(rng, dim_out * n_kraus, dim_in)
    return [np.ascontiguousarray(v[k * dim_out : (k + 1) * dim_out, :]) for k in range(n_kraus)]
