"""Fidelity, Bures-type channel distance, and worst-case entanglement fidelity.

The fidelity f(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)) is computed
spectrally and is extended to positive operators of trace at most one, which
the channel-comparison machinery below needs when trace-nonincreasing maps
appear.

The worst-case entanglement fidelity F(N, M) = min_rho F_rho(N, M) is
evaluated by multi-start gradient descent over the unconstrained
parameterization rho = G G^dag / Tr(G G^dag); the returned value is an upper
bound on the true minimum (exact when the search converges, which the
deterministic rank-one starts make reliable at the dimensions used here).
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .channels import KrausChannel
from .errors import DimensionMismatch, NotPSD
from .linalg_core import (
    as_complex_matrix,
    dagger,
    frobenius,
    hermitian_eig,
    hermitian_part,
    matrix_sqrt_psd,
)

HERM_TOL = 1e-9
EIG_FLOOR = -1e-10
TRACE_CEILING = 1.0 + 1e-9


@dataclass(frozen=True)
class DensityOperator:
    """A positive operator of trace at most one (usually a state)."""

    matrix: np.ndarray
    trace_value: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_complex_matrix(self.matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def as_density(rho, check: bool = True) -> DensityOperator:
    if isinstance(rho, DensityOperator):
        return rho
    m = as_complex_matrix(rho)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("a density operator must be square")
    tr = float(np.trace(m).real)
    if check:
        if frobenius(m - dagger(m)) > HERM_TOL * max(1.0, frobenius(m)):
            raise NotPSD("density operator is not Hermitian within tolerance")
        w = kernels.jacobi_eigh(hermitian_part(m))[0]
        if w[-1] < EIG_FLOOR:
            raise NotPSD(f"density operator has eigenvalue {w[-1]:.3e}")
        if tr <= 0.0 or tr > TRACE_CEILING:
            raise NotPSD(f"density operator has trace {tr:.6f}")
    return DensityOperator(m, tr)


def fidelity(rho, sigma) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), for subnormalized positive operators."""
    r = as_density(rho)
    s = as_density(sigma)
    if r.dim != s.dim:
        raise DimensionMismatch("states have different dimensions")
    root = matrix_sqrt_psd(hermitian_part(r.matrix))
    inner = hermitian_part(root @ s.matrix @ root)
    w = kernels.jacobi_eigh(inner)[0]
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def purify(rho) -> np.ndarray:
    """|psi> = sum_i sqrt(p_i) |u_i> (x) |i> in the descending eigenbasis.

    Returns a vector of length d*d ordered system-major; tracing out the
    reference reproduces the input.
    """
    r = as_density(rho)
    w, v = hermitian_eig(r.matrix)
    d = r.dim
    psi = np.zeros(d * d, dtype=np.complex128)
    for i, wi in enumerate(w):
        if wi > 0.0:
            amp = np.sqrt(wi)
            for a in range(d):
                psi[a * d + i] += amp * v[a, i]
    return psi


def _extended(ch: KrausChannel, psi: np.ndarray, ref_dim: int) -> np.ndarray:
    """(ch (x) id)(|psi><psi|) without forming the tensor-product channel."""
    block = psi.reshape(ch.dim_in, ref_dim)
    out = np.zeros((ch.dim_out * ref_dim, ch.dim_out * ref_dim), dtype=np.complex128)
    for k in ch.kraus:
        img = (k @ block).reshape(ch.dim_out * ref_dim)
        out += np.outer(img, img.conj())
    return out


def entanglement_fidelity(n: KrausChannel, m: KrausChannel, rho) -> float:
    """F_rho(N, M) = f((N (x) id) psi, (M (x) id) psi) on a purification psi."""
    _check_pair(n, m)
    r = as_density(rho)
    if r.dim != n.dim_in:
        raise DimensionMismatch("state dimension does not match the channels")
    psi = purify(r)
    a = _extended(n, psi, r.dim)
    b = _extended(m, psi, r.dim)
    return fidelity(as_density(a, check=False), as_density(b, check=False))


def _check_pair(n: KrausChannel, m: KrausChannel):
    if n.dim_in != m.dim_in or n.dim_out != m.dim_out:
        raise DimensionMismatch("channels must share input and output spaces")


def cross_operator_array(n: KrausChannel, m: KrausChannel) -> np.ndarray:
    """P[a, b] = (K^N_a)^dag K^M_b, the overlap blocks driving F_rho(N, M)."""
    _check_pair(n, m)
    en, em, d = n.n_kraus, m.n_kraus, n.dim_in
    p = np.empty((en, em, d, d), dtype=np.complex128)
    for a in range(en):
        ka = dagger(n.stack[a])
        for b in range(em):
            p[a, b] = ka @ m.stack[b]
    return np.ascontiguousarray(p)


class WorstCaseResult(NamedTuple):
    value: float
    argmin_state: DensityOperator
    converged: bool
    spread: float


def _start_matrices(d: int, rng: np.random.Generator, n_random: int):
    starts = [np.eye(d, dtype=np.complex128)]
    for b in range(d):
        c = np.zeros((d, d), dtype=np.complex128)
        c[b, b] = 1.0
        starts.append(c)
    for _ in range(n_random):
        starts.append(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    for _ in range(n_random):
        g = rng.normal(size=(d, 1)) + 1j * rng.normal(size=(d, 1))
        starts.append(g @ (rng.normal(size=(1, d)) + 1j * rng.normal(size=(1, d))))
    return starts


def worst_case_fidelity(
    n: KrausChannel,
    m: KrausChannel,
    seed: int = 0,
    n_random_starts: int = 6,
    max_iter: int = 10000,
    rel_tol: float = 1e-9,
    probe_states: Optional[list] = None,
) -> WorstCaseResult:
    """min over input states of the entanglement fidelity between n and m.

    Multi-start descent with fixed per-start seeds; deterministric rank-one
    and maximally-mixed starts are always included, since minimizers are
    frequently rank-deficient.  ``converged`` reports whether every start
    met the step tolerance; the value is always a valid upper bound.
    """
    _check_pair(n, m)
    p = cross_operator_array(n, m)
    d = n.dim_in
    rng = np.random.default_rng(seed)
    best_f = np.inf
    best_c = None
    values = []
    all_conv = True
    for c0 in _start_matrices(d, rng, n_random_starts):
        f, c, conv = kernels.wcf_descent(p, np.ascontiguousarray(c0, dtype=np.complex128), max_iter, rel_tol)
        values.append(f)
        all_conv = all_conv and bool(conv)
        if f < best_f:
            best_f = f
            best_c = c
    if probe_states:
        for rho in probe_states:
            mat = as_density(rho).matrix
            c0 = _density_factor(mat)
            f = float(kernels.pair_fidelity(p, c0))
            values.append(f)
            if f < best_f:
                best_f = f
                best_c = c0
    rho_best = best_c @ dagger(best_c)
    tr = float(np.trace(rho_best).real)
    rho_best = hermitian_part(rho_best / tr)
    spread = float(max(values) - min(values)) if values else 0.0
    return WorstCaseResult(
        float(min(best_f, 1.0 + 1e-12)),
        as_density(rho_best, check=False),
        all_conv,
        spread,
    )


def _density_factor(rho: np.ndarray) -> np.ndarray:
    w, v = kernels.jacobi_eigh(hermitian_part(rho))[:2]
    return np.ascontiguousarray((v * np.sqrt(np.clip(w, 0.0, None))))


def fidelity_at_state(n: KrausChannel, m: KrausChannel, rho) -> float:
    """F_rho(N, M) through the Kraus overlap matrix (fast path)."""
    p = cross_operator_array(n, m)
    c = _density_factor(as_density(rho).matrix)
    return float(kernels.pair_fidelity(p, c))


def channel_distance(n: KrausChannel, m: KrausChannel, **kwargs) -> float:
    """Bures-type distance sqrt(1 - F(N, M)); satisfies the triangle inequality."""
    f = worst_case_fidelity(n, m, **kwargs).value
    return float(np.sqrt(max(0.0, 1.0 - f)))
