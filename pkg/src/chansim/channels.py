"""Quantum-channel data model.

Kraus/Choi/Stinespring forms, duals, composition, complementary channels,
minimal Kraus number, algebra projectors, and standard constructors.

Conventions fixed here (and relied on by the rest of the library):

* A channel's Stinespring isometry is V = sum_i E_i (x) |i>_E with the
  environment basis ordered like the Kraus list, so ``complementary`` is a
  deterministic representative of its (postprocessing-) equivalence class.
* Channel equality means Choi Frobenius distance <= 1e-9.
* Kraus lists are stored as given; ``canonicalize`` (Choi eigenvectors)
  is applied only where minimality matters.
"""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import DimensionMismatch, NotSubnormalized, NotTracePreserving
from .linalg_core import (
    as_complex_matrix,
    dagger,
    frobenius,
    hermitian_eig,
    hermitian_part,
    tensor,
)

TP_TOL = 1e-9
CHOI_EQ_TOL = 1e-9
KRAUS_RANK_TOL = 1e-9


class KrausChannel:
    """A completely positive map given by an ordered list of Kraus operators.

    ``tp_mode`` is "tp" (trace preserving) or "tni" (trace nonincreasing);
    the corresponding sum condition is validated at construction.
    """

    __slots__ = ("stack", "dim_in", "dim_out", "tp_mode", "name")

    def __init__(self, kraus: Sequence[np.ndarray], tp_mode: str = "tp", name: str = ""):
        mats = [as_complex_matrix(k) for k in kraus]
        if not mats:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        shape = mats[0].shape
        for k in mats:
            if k.shape != shape:
                raise DimensionMismatch("Kraus operators must share one shape")
        if tp_mode not in ("tp", "tni"):
            raise ValueError("tp_mode must be 'tp' or 'tni'")
        self.stack = np.ascontiguousarray(np.stack(mats))
        self.dim_out, self.dim_in = shape
        self.tp_mode = tp_mode
        self.name = name
        self._validate()

    def _validate(self):
        s = kernels.dual_apply_kraus(self.stack, np.eye(self.dim_out, dtype=np.complex128))
        gap = s - np.eye(self.dim_in)
        if self.tp_mode == "tp":
            if frobenius(gap) > TP_TOL:
                raise NotTracePreserving(
                    f"sum E^dag E deviates from identity by {frobenius(gap):.3e}"
                )
        else:
            w = kernels.jacobi_eigh(hermitian_part(-gap))[0]
            if w[-1] < -TP_TOL:
                raise NotSubnormalized(
                    f"1 - sum E^dag E has eigenvalue {w[-1]:.3e}"
                )

    @property
    def kraus(self) -> List[np.ndarray]:
        return [self.stack[i] for i in range(self.stack.shape[0])]

    @property
    def n_kraus(self) -> int:
        return self.stack.shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (
            f"KrausChannel({self.dim_in}->{self.dim_out}, {self.n_kraus} Kraus,"
            f" {self.tp_mode}{label})"
        )


@dataclass(frozen=True)
class Isometry:
    """V of shape (dim_out * dim_env, dim_in) with V^dag V = 1."""

    v: np.ndarray
    dim_out: int
    dim_env: int

    def __post_init__(self):
        v = as_complex_matrix(self.v)
        object.__setattr__(self, "v", v)
        if v.shape[0] != self.dim_out * self.dim_env:
            raise DimensionMismatch("isometry rows do not match dim_out * dim_env")
        if frobenius(dagger(v) @ v - np.eye(v.shape[1])) > TP_TOL:
            raise NotTracePreserving("V^dag V deviates from the identity")

    @property
    def dim_in(self) -> int:
        return self.v.shape[1]


@dataclass(frozen=True)
class BlockAlgebra:
    """A dagger-algebra as a direct sum of (n_i, m_i) blocks.

    ``basis_isometry`` is the unitary mapping the ambient space onto the
    block decomposition; an ambient operator A belongs to the algebra iff
    U A U^dag = direct_sum_i (A_i (x) 1_{m_i}).
    """

    blocks: Tuple[Tuple[int, int], ...]
    basis_isometry: Isometry

    def __post_init__(self):
        blocks = tuple((int(n), int(m)) for n, m in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        d = sum(n * m for n, m in blocks)
        v = self.basis_isometry.v
        if v.shape != (d, d):
            raise DimensionMismatch("basis isometry must be a unitary on the ambient space")

    @property
    def dim(self) -> int:
        return sum(n * m for n, m in self.blocks)


# ---------------------------------------------------------------------------
# basic actions


def apply(ch: KrausChannel, rho) -> np.ndarray:
    rho = as_complex_matrix(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise DimensionMismatch(f"state shape {rho.shape} does not match dim_in={ch.dim_in}")
    return kernels.apply_kraus(ch.stack, rho)


def dual_apply(ch: KrausChannel, a) -> np.ndarray:
    a = as_complex_matrix(a)
    if a.shape != (ch.dim_out, ch.dim_out):
        raise DimensionMismatch(f"observable shape {a.shape} does not match dim_out={ch.dim_out}")
    return kernels.dual_apply_kraus(ch.stack, a)


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """outer . inner (inner acts first)."""
    if inner.dim_out != outer.dim_in:
        raise DimensionMismatch(
            f"cannot compose {outer.dim_in}->{outer.dim_out} after {inner.dim_in}->{inner.dim_out}"
        )
    ks = [f @ e for f in outer.kraus for e in inner.kraus]
    mode = "tp" if (outer.tp_mode == "tp" and inner.tp_mode == "tp") else "tni"
    return KrausChannel(ks, tp_mode=mode)


def tensor_channels(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    ks = [tensor(e, f) for e in a.kraus for f in b.kraus]
    mode = "tp" if (a.tp_mode == "tp" and b.tp_mode == "tp") else "tni"
    return KrausChannel(ks, tp_mode=mode)


def stinespring_isometry(ch: KrausChannel) -> Isometry:
    """V = sum_i E_i (x) |i>_E; environment dimension = number of Kraus operators."""
    if ch.tp_mode != "tp":
        raise NotTracePreserving("Stinespring dilation requires a trace-preserving channel")
    r = ch.n_kraus
    v = np.ascontiguousarray(
        ch.stack.transpose(1, 0, 2).reshape(ch.dim_out * r, ch.dim_in)
    )
    return Isometry(v, dim_out=ch.dim_out, dim_env=r)


def complementary(ch: KrausChannel) -> KrausChannel:
    """The channel to the environment of the canonical dilation.

    Kraus operators G_b = (<b|_out (x) 1_E) V; the output dimension equals
    the number of Kraus operators of ``ch``.  Complementary channels are
    unique only up to postprocessing equivalence; this picks the
    representative fixed by the Kraus-list order.
    """
    if ch.tp_mode != "tp":
        raise NotTracePreserving("complementary channel requires a trace-preserving channel")
    ks = [np.ascontiguousarray(ch.stack[:, b, :]) for b in range(ch.dim_out)]
    return KrausChannel(ks, tp_mode="tp")


def choi(ch: KrausChannel) -> np.ndarray:
    """(ch (x) id)(|Omega><Omega|) with unnormalized |Omega> = sum_i |ii>."""
    c = np.einsum("kai,kbj->aibj", ch.stack, ch.stack.conj())
    d = ch.dim_out * ch.dim_in
    return np.ascontiguousarray(c.reshape(d, d))


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimensionMismatch("channels act on different spaces")
    return frobenius(choi(a) - choi(b))


def channels_equal(a: KrausChannel, b: KrausChannel, tol: float = CHOI_EQ_TOL) -> bool:
    return choi_distance(a, b) <= tol


def minimal_kraus_count(ch: KrausChannel) -> int:
    """Rank of the Choi matrix (eigenvalues above 1e-9 * lambda_max)."""
    w = hermitian_eig(choi(ch)).eigenvalues
    wmax = max(w[0], 0.0)
    count = int(np.sum(w > KRAUS_RANK_TOL * max(wmax, 1e-300)))
    return max(count, 1)


def canonicalize(ch: KrausChannel) -> KrausChannel:
    """Minimal Kraus representation from the Choi eigendecomposition."""
    w, v = hermitian_eig(choi(ch))
    wmax = max(w[0], 0.0)
    ks = []
    for j, wj in enumerate(w):
        if wj > KRAUS_RANK_TOL * max(wmax, 1e-300):
            ks.append(np.sqrt(wj) * v[:, j].reshape(ch.dim_out, ch.dim_in))
    if not ks:
        ks = [np.zeros((ch.dim_out, ch.dim_in), dtype=np.complex128)]
        return KrausChannel(ks, tp_mode="tni", name=ch.name)
    return KrausChannel(ks, tp_mode=ch.tp_mode, name=ch.name)


def complete_to_tp(ch: KrausChannel, tau) -> KrausChannel:
    """R'(rho) = R(rho) + Tr[(1 - R^dag(1)) rho] tau, in Kraus form."""
    tau = as_complex_matrix(tau)
    defect = hermitian_part(
        np.eye(ch.dim_in)
        - kernels.dual_apply_kraus(ch.stack, np.eye(ch.dim_out, dtype=np.complex128))
    )
    wd, vd = hermitian_eig(defect)
    if wd[-1] < -TP_TOL:
        raise NotSubnormalized("channel is not trace nonincreasing")
    if wd[0] <= TP_TOL:
        return KrausChannel(ch.kraus, tp_mode="tp", name=ch.name)
    wt, vt = hermitian_eig(hermitian_part(tau))
    extra = []
    for l, dl in enumerate(wd):
        if dl <= TP_TOL:
            continue
        for m, qm in enumerate(wt):
            if qm <= 1e-14:
                continue
            extra.append(np.sqrt(qm * dl) * np.outer(vt[:, m], vd[:, l].conj()))
    return KrausChannel(ch.kraus + extra, tp_mode="tp", name=ch.name)


def encode_then_noise(code_isometry: Isometry, noise: KrausChannel) -> KrausChannel:
    """The encoded channel, Kraus set {E_i V}."""
    v = code_isometry.v
    if noise.dim_in != v.shape[0]:
        raise DimensionMismatch("noise input dimension does not match the physical space")
    return KrausChannel([e @ v for e in noise.kraus], tp_mode=noise.tp_mode)


# ---------------------------------------------------------------------------
# operator algebras


def _block_offsets(blocks) -> List[int]:
    offs = [0]
    for n, m in blocks:
        offs.append(offs[-1] + n * m)
    return offs


def algebra_projector(alg: BlockAlgebra) -> KrausChannel:
    """Orthogonal (Hilbert-Schmidt) projector onto the algebra, as a channel.

    P(rho) = sum_i Tr_2(P_i rho P_i) (x) 1_i / m_i in the block basis,
    conjugated back by the basis isometry.  Idempotent, self-dual, unital.
    """
    d = alg.dim
    u = alg.basis_isometry.v
    offs = _block_offsets(alg.blocks)
    ks = []
    for i, (n, m) in enumerate(alg.blocks):
        o = offs[i]
        scale = 1.0 / np.sqrt(m)
        for a in range(m):
            for b in range(m):
                op = np.zeros((d, d), dtype=np.complex128)
                for t in range(n):
                    op[o + t * m + a, o + t * m + b] = scale
                ks.append(dagger(u) @ op @ u)
    return KrausChannel(ks, tp_mode="tp")


def commutant(alg: BlockAlgebra) -> BlockAlgebra:
    """Blocks (m_i, n_i) with per-block tensor-factor swaps on the same basis."""
    d = alg.dim
    offs = _block_offsets(alg.blocks)
    swap = np.zeros((d, d), dtype=np.complex128)
    for i, (n, m) in enumerate(alg.blocks):
        o = offs[i]
        for a in range(n):
            for b in range(m):
                swap[o + b * n + a, o + a * m + b] = 1.0
    new_u = swap @ alg.basis_isometry.v
    new_blocks = tuple((m, n) for n, m in alg.blocks)
    return BlockAlgebra(new_blocks, Isometry(new_u, dim_out=d, dim_env=1))


def full_algebra(d: int) -> BlockAlgebra:
    return BlockAlgebra(((d, 1),), Isometry(np.eye(d, dtype=np.complex128), d, 1))


def trivial_algebra(d: int) -> BlockAlgebra:
    return BlockAlgebra(((1, d),), Isometry(np.eye(d, dtype=np.complex128), d, 1))


# ---------------------------------------------------------------------------
# standard constructors


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d, dtype=np.complex128)], name=f"id_{d}")


def unitary_channel(u) -> KrausChannel:
    return KrausChannel([as_complex_matrix(u)])


def trace_channel(d: int) -> KrausChannel:
    """The unique channel with one-dimensional output."""
    ks = [np.zeros((1, d), dtype=np.complex128) for _ in range(d)]
    for j in range(d):
        ks[j][0, j] = 1.0
    return KrausChannel(ks, name=f"trace_{d}")


def constant_channel(sigma, dim_in: int) -> KrausChannel:
    """rho -> sigma Tr(rho).

    Kraus operators s|i><j| ordered j-major, with s the complex-symmetric
    factor V sqrt(D) V^T of sigma = V D V^dag.  That factor satisfies both
    s s^dag = sigma and s^dag s = conj(sigma), which makes the canonical
    complementary channel come out exactly as rho -> rho (x) sigma.
    """
    sigma = as_complex_matrix(sigma)
    w, v = hermitian_eig(sigma)
    s = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    d_sig = sigma.shape[0]
    ks = []
    for j in range(dim_in):
        for i in range(d_sig):
            k = np.zeros((d_sig, dim_in), dtype=np.complex128)
            k[:, j] = s[:, i]
            ks.append(k)
    return KrausChannel(ks, name="constant")


def append_state_channel(sigma, dim_in: int) -> KrausChannel:
    """rho -> rho (x) sigma."""
    sigma = as_complex_matrix(sigma)
    w, v = hermitian_eig(sigma)
    eye = np.eye(dim_in, dtype=np.complex128)
    ks = []
    for m, wm in enumerate(w):
        if wm > 1e-14:
            ks.append(np.kron(eye, np.sqrt(wm) * v[:, m].reshape(-1, 1)))
    return KrausChannel(ks, name="append_state")


def dephasing_channel(p: float) -> KrausChannel:
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    return KrausChannel(
        [np.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), np.sqrt(p) * z],
        name=f"dephasing_{p}",
    )


def completely_dephasing_channel(d: int) -> KrausChannel:
    """rho -> sum_i |i><i| rho |i><i| (keeps only the diagonal)."""
    ks = []
    for i in range(d):
        k = np.zeros((d, d), dtype=np.complex128)
        k[i, i] = 1.0
        ks.append(k)
    return KrausChannel(ks, name=f"dephase_diag_{d}")


def mixed_dephasing_channel(p: float) -> KrausChannel:
    """(1-p) id + p * (dephase to the diagonal), on a qubit."""
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    return KrausChannel(
        [np.sqrt(1.0 - p / 2.0) * np.eye(2, dtype=np.complex128), np.sqrt(p / 2.0) * z],
        name=f"mixed_dephasing_{p}",
    )


def depolarizing_channel(p: float) -> KrausChannel:
    x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    s = np.sqrt(p / 4.0)
    return KrausChannel(
        [np.sqrt(1.0 - 3.0 * p / 4.0) * eye, s * x, s * y, s * z],
        name=f"depolarizing_{p}",
    )


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    k0 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(np.complex128)
    k1 = np.zeros((2, 2), dtype=np.complex128)
    k1[0, 1] = np.sqrt(gamma)
    return KrausChannel([k0, k1], name=f"amplitude_damping_{gamma}")


# ---------------------------------------------------------------------------
# postprocessing order


class PostprocessingResult(NamedTuple):
    related: bool
    residual: float


def _choi_blocks(j: np.ndarray, dim_out: int, dim_in: int) -> np.ndarray:
    """Reshape a Choi matrix on out (x) in into blocks N[i, j] over out indices."""
    t = j.reshape(dim_out, dim_in, dim_out, dim_in)
    return t.transpose(0, 2, 1, 3)  # [i, j, a, a']


def _compose_choi(c_r: np.ndarray, n_blocks: np.ndarray, dims) -> np.ndarray:
    """Choi of R . N from the Choi of R and the out-indexed blocks of Choi(N)."""
    d_rout, d_rin, d_a = dims
    c = c_r.reshape(d_rout, d_rin, d_rout, d_rin)
    out = np.einsum("bicj,ijmn->bmcn", c, n_blocks)
    d = d_rout * d_a
    return out.reshape(d, d)


def _project_tp(c: np.ndarray, d_out: int, d_in: int) -> np.ndarray:
    t = c.reshape(d_out, d_in, d_out, d_in)
    tr = np.einsum("aiaj->ij", t)
    shift = (tr - np.eye(d_in)) / d_out
    t = t - np.einsum("ab,ij->aibj", np.eye(d_out), shift)
    return t.reshape(c.shape)


def _project_psd(c: np.ndarray) -> np.ndarray:
    w, v = kernels.jacobi_eigh(hermitian_part(c))[:2]
    w = np.clip(w, 0.0, None)
    return (v * w) @ dagger(v)


def _project_cptp(c: np.ndarray, d_out: int, d_in: int, iters: int = 60) -> np.ndarray:
    """Dykstra projection onto {C >= 0} intersect {Tr_out C = 1}."""
    x = c.copy()
    p_inc = np.zeros_like(c)
    q_inc = np.zeros_like(c)
    for _ in range(iters):
        y = _project_psd(x + p_inc)
        p_inc = x + p_inc - y
        x = _project_tp(y + q_inc, d_out, d_in)
        q_inc = y + q_inc - x
    return x


def postprocessing_oracle(
    n: KrausChannel,
    m: KrausChannel,
    tol: float = 1e-6,
    max_iters: int = 5000,
    starts: int = 3,
    seed: int = 0,
) -> PostprocessingResult:
    """Numerically decide whether some channel R gives R . n = m.

    Minimizes ||Choi(R . n) - Choi(m)||_F over trace-preserving R by
    alternating projections between the affine solution set of the linear
    constraint and the CPTP set (the problem is convex in the Choi matrix
    of R).  ``related`` means the residual fell below ``tol``; a large
    residual is reported as evidence, never as a proof of unrelatedness.
    """
    if n.dim_in != m.dim_in:
        raise DimensionMismatch("channels must share the input space")
    d_a, d_b, d_c = n.dim_in, n.dim_out, m.dim_out
    n_blocks = _choi_blocks(choi(n), d_b, d_a)
    target = choi(m)
    dim_c = d_c * d_b

    # explicit matrix of the linear map C_R -> Choi(R . n)
    lmat = np.zeros(((d_c * d_a) ** 2, dim_c**2), dtype=np.complex128)
    for col in range(dim_c**2):
        e = np.zeros(dim_c**2, dtype=np.complex128)
        e[col] = 1.0
        lmat[:, col] = _compose_choi(e.reshape(dim_c, dim_c), n_blocks, (d_c, d_b, d_a)).ravel()
    lpinv = np.linalg.pinv(lmat, rcond=1e-12)
    tvec = target.ravel()

    rng = np.random.default_rng(seed)
    best = np.inf
    for s in range(starts):
        if s == 0:
            c = np.kron(np.eye(d_c), np.eye(d_b)) / d_c
        else:
            g = rng.normal(size=(dim_c, dim_c)) + 1j * rng.normal(size=(dim_c, dim_c))
            c = _project_cptp(g @ dagger(g) / dim_c, d_c, d_b)
        res_prev = np.inf
        for it in range(max_iters):
            vec = c.ravel()
            vec = vec - lpinv @ (lmat @ vec - tvec)
            c = _project_cptp(vec.reshape(dim_c, dim_c), d_c, d_b)
            res = float(np.linalg.norm(lmat @ c.ravel() - tvec))
            if res < best:
                best = res
            if res <= tol * 1e-2 or abs(res_prev - res) < 1e-14:
                break
            res_prev = res
    return PostprocessingResult(bool(best <= tol), best)


# ---------------------------------------------------------------------------
# JSON schema


def matrix_to_json(m) -> list:
    m = as_complex_matrix(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    try:
        arr = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in rows],
            dtype=np.complex128,
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed matrix payload: {exc}") from exc
    if arr.ndim != 2:
        raise ValueError("matrix payload must be two-dimensional")
    return arr


def channel_to_dict(ch: KrausChannel) -> dict:
    return {
        "name": ch.name,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "tp_mode": ch.tp_mode,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_dict(data: dict) -> KrausChannel:
    for key in ("dim_in", "dim_out", "tp_mode", "kraus"):
        if key not in data:
            raise ValueError(f"channel payload missing key {key!r}")
    if data["tp_mode"] not in ("tp", "tni"):
        raise ValueError(f"unknown tp_mode {data['tp_mode']!r}")
    ks = [matrix_from_json(k) for k in data["kraus"]]
    ch = KrausChannel(ks, tp_mode=data["tp_mode"], name=str(data.get("name", "")))
    if ch.dim_in != int(data["dim_in"]) or ch.dim_out != int(data["dim_out"]):
        raise ValueError("declared dimensions do not match the Kraus operators")
    return ch


def isometry_to_dict(iso: Isometry, role: Optional[str] = None) -> dict:
    out = {
        "name": "isometry",
        "dim_in": iso.dim_in,
        "dim_out": iso.v.shape[0],
        "tp_mode": "tp",
        "kraus": [matrix_to_json(iso.v)],
    }
    if role is not None:
        out["role"] = role
    return out


def isometry_from_dict(data: dict) -> Isometry:
    ch = channel_from_dict(data)
    if ch.n_kraus != 1:
        raise ValueError("an isometry serializes as a single-Kraus channel")
    return Isometry(ch.kraus[0], dim_out=ch.dim_out, dim_env=1)


def algebra_to_dict(alg: BlockAlgebra) -> dict:
    return {
        "dim": alg.dim,
        "blocks": [[n, m] for n, m in alg.blocks],
        "basis": matrix_to_json(alg.basis_isometry.v),
    }


def algebra_from_dict(data: dict) -> BlockAlgebra:
    for key in ("dim", "blocks", "basis"):
        if key not in data:
            raise ValueError(f"algebra payload missing key {key!r}")
    basis = matrix_from_json(data["basis"])
    blocks = tuple((int(n), int(m)) for n, m in data["blocks"])
    alg = BlockAlgebra(blocks, Isometry(basis, dim_out=basis.shape[0], dim_env=1))
    if alg.dim != int(data["dim"]):
        raise ValueError("declared dimension does not match the blocks")
    return alg
