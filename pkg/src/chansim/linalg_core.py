"""Dense complex linear algebra primitives.

Matrices are plain ``complex128`` ndarrays.  The Hermitian eigensolver is a
cyclic Jacobi iteration (see :mod:`chansim.kernels`): dependency-free,
adequate at the dimensions this library targets (d <= 64), and fully
deterministic, which the regression tests rely on.  All spectral
conventions downstream (descending eigenvalues, largest-component-real
phase fixing) derive from it.
"""

from typing import NamedTuple, Tuple

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotPSD

HERM_TOL = 1e-9
PSD_CLAMP = 1e-10
# Singular values below this (relative) threshold are treated as zero; the
# matching left vectors would otherwise be dominated by eigensolver noise.
_SVD_RANK_TOL = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns, phase-fixed


class PolarDecomposition(NamedTuple):
    unitary_part: np.ndarray
    positive_part: np.ndarray


class TraceNormResult(NamedTuple):
    value: float
    maximizer: np.ndarray  # contraction A with Re Tr(A M^dag) = Tr|M|


def as_complex_matrix(m) -> np.ndarray:
    m = np.ascontiguousarray(np.asarray(m, dtype=np.complex128))
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m).ravel()))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(m).conj().T)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def hermitian_eig(m) -> EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Raises NotHermitian when the input fails the Hermiticity tolerance and
    NoConvergence if the rotation budget runs out (not observed in practice).
    """
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("hermitian_eig expects a square matrix")
    if frobenius(m - dagger(m)) > HERM_TOL * max(1.0, frobenius(m)):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, v, status = kernels.jacobi_eigh(m)
    if status != 0:
        raise NoConvergence("Jacobi sweep budget exhausted")
    return EigenDecomposition(w, v)


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    m = as_complex_matrix(m)
    w, v = hermitian_eig(m)
    scale = max(abs(w[0]), abs(w[-1]), 0.0)
    if w[-1] < -PSD_CLAMP * max(scale, 1.0):
        raise NotPSD(f"matrix has eigenvalue {w[-1]:.3e} below the PSD tolerance")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ dagger(v)


def _svd(m: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic compact SVD with completed singular vectors.

    Returns (u, s, v) with u: (p, k), v: (q, k), k = min(p, q),
    m = u @ diag(s) @ v^dag.  Left vectors for zero singular values are
    completed from the null eigenvectors of m m^dag in index order, so the
    output is reproducible (the completion choice is observable downstream).
    """
    m = as_complex_matrix(m)
    p, q = m.shape
    k = min(p, q)
    w, v = kernels.jacobi_eigh(dagger(m) @ m)[:2]
    s = np.sqrt(np.clip(w, 0.0, None))
    smax = s[0] if s.size else 0.0
    u = np.zeros((p, k), dtype=np.complex128)
    rank = 0
    for j in range(k):
        if s[j] > _SVD_RANK_TOL * max(smax, 1e-300):
            col = m @ v[:, j]
            # re-orthonormalize: near the rank threshold the raw image
            # col / s_j can drift off unit norm by eigensolver noise
            for i in range(j):
                col = col - u[:, i] * np.vdot(u[:, i], col)
            nrm = np.linalg.norm(col)
            if nrm <= _SVD_RANK_TOL * max(smax, 1e-300):
                break
            u[:, j] = col / nrm
            rank = j + 1
        else:
            s[j] = s[j] if s[j] > 0 else 0.0
    if rank < k:
        # complete from the small-eigenvalue side of m m^dag, index order
        wl, ul = kernels.jacobi_eigh(m @ dagger(m))[:2]
        cols = []
        candidates = [ul[:, j] for j in range(p - 1, -1, -1)]  # ascending eigenvalue
        candidates += [np.eye(p, dtype=np.complex128)[:, j] for j in range(p)]
        for cand in candidates:
            if rank + len(cols) >= k:
                break
            vec = cand.copy()
            for j in range(rank):
                vec -= u[:, j] * np.vdot(u[:, j], vec)
            for prev in cols:
                vec -= prev * np.vdot(prev, vec)
            nrm = np.linalg.norm(vec)
            if nrm > 0.5:
                vec = vec / nrm
                idx = int(np.argmax(np.abs(vec)))
                ph = vec[idx]
                if abs(ph) > 0:
                    vec = vec * (ph.conj() / abs(ph))
                cols.append(vec)
        for j, vec in enumerate(cols):
            u[:, rank + j] = vec
    return u, s[:k], v[:, :k]


def polar_decompose(m) -> PolarDecomposition:
    """M = U |M| with U unitary; deterministic completion on the cokernel."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("polar_decompose expects a square matrix")
    u, s, v = _svd(m)
    unitary = u @ dagger(v)
    positive = (v * s) @ dagger(v)
    return PolarDecomposition(unitary, positive)


def polar_isometry(m) -> np.ndarray:
    """Isometric polar factor of a (possibly rectangular) matrix."""
    u, _s, v = _svd(as_complex_matrix(m))
    return u @ dagger(v)


def trace_norm(m) -> TraceNormResult:
    """Sum of singular values, plus the contraction A with Re Tr(A M^dag) = Tr|M|."""
    m = as_complex_matrix(m)
    u, s, v = _svd(m)
    return TraceNormResult(float(np.sum(s)), u @ dagger(v))


def tensor(a, b) -> np.ndarray:
    """Kronecker product."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def partial_trace(m, keep: str, dims: Tuple[int, int]) -> np.ndarray:
    """Trace out one tensor factor of an operator on C^dA (x) C^dB.

    ``keep`` is "first" or "second".
    """
    m = as_complex_matrix(m)
    da, db = dims
    if m.shape != (da * db, da * db):
        raise DimensionMismatch(
            f"matrix of shape {m.shape} does not match dims {dims}"
        )
    t = m.reshape(da, db, da, db)
    if keep == "first":
        return np.ascontiguousarray(np.einsum("abcb->ac", t))
    if keep == "second":
        return np.ascontiguousarray(np.einsum("abac->bc", t))
    raise ValueError("keep must be 'first' or 'second'")


def pseudo_inverse_sqrt(m, rank_tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse square root on the support of a PSD matrix.

    Eigenvalues above rank_tol * lambda_max map to lambda^(-1/2), the rest to
    zero.  Returns (result, kernel_projector).
    """
    m = as_complex_matrix(m)
    w, v = hermitian_eig(m)
    scale = max(abs(w[0]), abs(w[-1]), 0.0)
    if w[-1] < -PSD_CLAMP * max(scale, 1.0):
        raise NotPSD(f"matrix has eigenvalue {w[-1]:.3e} below the PSD tolerance")
    wmax = max(w[0], 0.0)
    inv = np.zeros_like(w)
    kernel = np.zeros(m.shape, dtype=np.complex128)
    for j, wj in enumerate(w):
        if wj > rank_tol * wmax and wj > 0.0:
            inv[j] = 1.0 / np.sqrt(wj)
        else:
            kernel += np.outer(v[:, j], v[:, j].conj())
    return (v * inv) @ dagger(v), hermitian_part(kernel)


def support_projector(m, rank_tol: float = 1e-10) -> np.ndarray:
    m = as_complex_matrix(m)
    w, v = hermitian_eig(m)
    wmax = max(w[0], 0.0)
    proj = np.zeros(m.shape, dtype=np.complex128)
    for j, wj in enumerate(w):
        if wj > rank_tol * wmax and wj > 0.0:
            proj += np.outer(v[:, j], v[:, j].conj())
    return hermitian_part(proj)


def trace_distance(a, b) -> float:
    """(1/2) Tr|a - b| for Hermitian a, b."""
    diff = hermitian_part(as_complex_matrix(a) - as_complex_matrix(b))
    w = kernels.jacobi_eigh(diff)[0]
    return float(0.5 * np.sum(np.abs(w)))
