"""Exact correctability tests and the standard exact recovery.

A subspace code is an isometric encoding V: logical -> physical with code
projector P = V V^dag.  The familiar correctability condition for noise
Kraus operators {E_i} is P E_i^dag E_j P = lambda_ij P; the matrix lambda
is PSD with unit trace exactly when the condition holds for a
trace-preserving channel.  The algebra version replaces "multiple of P"
with membership of V^dag E_i^dag E_j V in the commutant.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channels import (
    BlockAlgebra,
    Isometry,
    KrausChannel,
    algebra_projector,
    commutant,
    complete_to_tp,
)
from .errors import DimensionMismatch, NotCorrectable
from .linalg_core import dagger, frobenius, hermitian_eig, hermitian_part

KL_TOL = 1e-8


@dataclass(frozen=True)
class CodeSpec:
    encoding: Isometry
    label: str = ""

    @property
    def logical_dim(self) -> int:
        return self.encoding.v.shape[1]

    @property
    def physical_dim(self) -> int:
        return self.encoding.v.shape[0]

    @property
    def projector(self) -> np.ndarray:
        v = self.encoding.v
        return v @ dagger(v)


class KLResult(NamedTuple):
    correctable: bool
    lambda_matrix: np.ndarray
    residual: float


def knill_laflamme_check(code: CodeSpec, noise: KrausChannel, tol: float = KL_TOL) -> KLResult:
    """Test P E_i^dag E_j P = lambda_ij P on the code projector.

    lambda_ij is extracted by the normalized trace (exact when the condition
    holds); the residual max_ij ||P E_i^dag E_j P - lambda_ij P||_F
    quantifies any violation.
    """
    if noise.dim_in != code.physical_dim:
        raise DimensionMismatch("noise must act on the physical space of the code")
    p = code.projector
    tr_p = float(np.trace(p).real)
    r = noise.n_kraus
    lam = np.zeros((r, r), dtype=np.complex128)
    residual = 0.0
    for i in range(r):
        ei = noise.stack[i]
        for j in range(r):
            block = p @ dagger(ei) @ noise.stack[j] @ p
            lam[i, j] = np.trace(block) / tr_p
            residual = max(residual, frobenius(block - lam[i, j] * p))
    return KLResult(bool(residual <= tol), lam, float(residual))


class AlgebraCheckResult(NamedTuple):
    correctable: bool
    residual: float


def algebra_correctable_check(
    alg: BlockAlgebra, code: CodeSpec, noise: KrausChannel, tol: float = KL_TOL
) -> AlgebraCheckResult:
    """Test V^dag E_i^dag E_j V in the commutant of the algebra, for all i, j."""
    if alg.dim != code.logical_dim:
        raise DimensionMismatch("the algebra must live on the logical space")
    if noise.dim_in != code.physical_dim:
        raise DimensionMismatch("noise must act on the physical space of the code")
    proj = algebra_projector(commutant(alg))
    v = code.encoding.v
    residual = 0.0
    for i in range(noise.n_kraus):
        ei = noise.stack[i]
        for j in range(noise.n_kraus):
            op = dagger(v) @ dagger(ei) @ noise.stack[j] @ v
            # the channel projector is the orthogonal projector onto the
            # commutant in Hilbert-Schmidt inner product, also for non-
            # Hermitian arguments (its Kraus set is closed under adjoints)
            residual = max(residual, frobenius(op - apply_to_operator(proj, op)))
    return AlgebraCheckResult(bool(residual <= tol), float(residual))


def apply_to_operator(ch: KrausChannel, op: np.ndarray) -> np.ndarray:
    """Apply a channel to a general (not necessarily PSD) operator."""
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=np.complex128)
    for k in ch.kraus:
        out += k @ op @ dagger(k)
    return out


def exact_recovery_from_kl(code: CodeSpec, noise: KrausChannel, tol: float = KL_TOL) -> KrausChannel:
    """The standard recovery channel for a correctable (code, noise) pair.

    Diagonalizing lambda produces canonical errors F_k with mutually
    orthogonal images of the code; the recovery isometrically inverts each
    and is completed to trace preserving on the unused subspace.
    """
    check = knill_laflamme_check(code, noise, tol=tol)
    if not check.correctable:
        raise NotCorrectable(f"Knill-Laflamme residual {check.residual:.3e} exceeds {tol:.1e}")
    w, u = hermitian_eig(hermitian_part(check.lambda_matrix))
    v = code.encoding.v
    ks = []
    for k, dk in enumerate(w):
        if dk <= 1e-12:
            continue
        fk = np.tensordot(u[:, k], noise.stack, axes=(0, 0))  # sum_i u_ik E_i
        ks.append(dagger(fk @ v) / np.sqrt(dk))
    partial = KrausChannel(ks, tp_mode="tni")
    tau = np.eye(code.logical_dim, dtype=np.complex128) / code.logical_dim
    return complete_to_tp(partial, tau)


def repetition_code() -> CodeSpec:
    """Three-qubit repetition encoding |0> -> |000>, |1> -> |111|."""
    v = np.zeros((8, 2), dtype=np.complex128)
    v[0, 0] = 1.0
    v[7, 1] = 1.0
    return CodeSpec(Isometry(v, dim_out=8, dim_env=1), label="3-qubit repetition")


def bit_flip_noise(p: float) -> KrausChannel:
    """Single-location bit flips on three qubits, identity-weighted.

    Kraus set {sqrt(1-3p) 1, sqrt(p) X_1, sqrt(p) X_2, sqrt(p) X_3}.
    """
    if not 0.0 <= p <= 1.0 / 3.0:
        raise ValueError("flip probability must lie in [0, 1/3]")
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    ops = [
        np.sqrt(1.0 - 3.0 * p) * np.kron(np.kron(eye, eye), eye),
        np.sqrt(p) * np.kron(np.kron(x, eye), eye),
        np.sqrt(p) * np.kron(np.kron(eye, x), eye),
        np.sqrt(p) * np.kron(np.kron(eye, eye), x),
    ]
    return KrausChannel(ops, name=f"bit_flip_{p}")
