"""Minimax state discrimination estimates.

The preparation of one of k states rho_i can be viewed as a classical-to-
quantum channel; comparing it against the basis-dephasing target through
the complementary-channel machinery yields the estimate

    Delta = 1 - min_p Tr sqrt(sum_i p_i^2 rho_i^2)

over priors p, whose objective is the trace norm of a linear function of p
and hence convex.  Delta brackets the minimax error probability:

    Delta/2 - Delta^2/16  <=  min_POVM max_i [1 - Tr(rho_i A_i)]  <=  2 Delta - Delta^2.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from . import kernels
from .channels import KrausChannel
from .errors import DimensionMismatch, InvalidPovm, NoConvergence
from .fidelity import DensityOperator, as_density
from .linalg_core import dagger, frobenius, hermitian_part, matrix_sqrt_psd

# certificate level for the prior optimization: the linearization gap over
# the simplex bounds the suboptimality of Delta directly.  Interior optima
# of Tr|X(p)| hit a float64 floor near curvature * sqrt(eps), so demanding
# much below 1e-8 is not attainable in double precision.
SIMPLEX_GAP_TOL = 3e-8


@dataclass(frozen=True)
class StateEnsemble:
    states: Tuple[DensityOperator, ...]

    def __post_init__(self):
        states = tuple(as_density(s) for s in self.states)
        if not states:
            raise DimensionMismatch("an ensemble needs at least one state")
        d = states[0].dim
        for s in states:
            if s.dim != d:
                raise DimensionMismatch("ensemble states must share one dimension")
            if abs(s.trace_value - 1.0) > 1e-9:
                raise DimensionMismatch("ensemble states must have unit trace")
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    @property
    def size(self) -> int:
        return len(self.states)


def ensemble(states: Sequence) -> StateEnsemble:
    return StateEnsemble(tuple(as_density(s) for s in states))


@dataclass(frozen=True)
class Povm:
    elements: Tuple[np.ndarray, ...]

    def __post_init__(self):
        elems = tuple(np.ascontiguousarray(e, dtype=np.complex128) for e in self.elements)
        if not elems:
            raise InvalidPovm("a POVM needs at least one element")
        d = elems[0].shape[0]
        total = np.zeros((d, d), dtype=np.complex128)
        for e in elems:
            if e.shape != (d, d):
                raise InvalidPovm("POVM elements must be square and share one dimension")
            w = kernels.jacobi_eigh(hermitian_part(e))[0]
            if w[-1] < -1e-9:
                raise InvalidPovm(f"POVM element has eigenvalue {w[-1]:.3e}")
            total += e
        if frobenius(total - np.eye(d)) > 1e-9:
            raise InvalidPovm("POVM elements must sum to the identity")
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def preparation_channel(ens: StateEnsemble) -> KrausChannel:
    """The classical-to-quantum channel rho -> sum_i rho_i <i|rho|i>.

    Kraus factors use the principal square root s_i = sqrt(rho_i); any other
    factor of rho_i differs by a left unitary and gives the same channel.
    """
    k = ens.size
    d = ens.dim
    ks = []
    for i, state in enumerate(ens.states):
        root = matrix_sqrt_psd(state.matrix)
        for j in range(d):
            op = np.zeros((d, k), dtype=np.complex128)
            op[:, i] = root[:, j]
            ks.append(op)
    return KrausChannel(ks, name="preparation")


def measurement_channel(povm: Povm) -> KrausChannel:
    """Measure-and-record channel rho -> sum_i Tr(rho A_i) |i><i|."""
    k = len(povm.elements)
    d = povm.dim
    ks = []
    for i, a in enumerate(povm.elements):
        root = matrix_sqrt_psd(hermitian_part(a))
        for m in range(d):
            op = np.zeros((k, d), dtype=np.complex128)
            op[i, :] = root[m, :]
            ks.append(op)
    return KrausChannel(ks, name="measurement")


class DeltaResult(NamedTuple):
    delta: float
    p_star: np.ndarray
    converged: bool


def _delta_objective(stack2: np.ndarray, p: np.ndarray):
    """Value and simplex subgradient of p -> Tr sqrt(sum_i p_i^2 rho_i^2).

    The objective is Tr|X(p)| for the stacked X(p) = [p_1 rho_1; ...], so a
    subgradient comes from the polar partial isometry of X(p).
    """
    k, d, _ = stack2.shape
    x = np.concatenate([p[i] * stack2[i] for i in range(k)], axis=0)
    h = hermitian_part(dagger(x) @ x)
    w, q, _st = kernels.jacobi_eigh(h)
    val = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    wmax = max(w[0], 0.0)
    inv = np.array([1.0 / np.sqrt(wi) if wi > wmax * 1e-12 and wi > 0 else 0.0 for wi in w])
    u = x @ (q * inv) @ dagger(q)
    grad = np.empty(k)
    for i in range(k):
        block = u[i * d : (i + 1) * d, :]
        grad[i] = float(np.real(np.trace(dagger(block) @ stack2[i])))
    return val, grad


def delta_estimate(
    ens: StateEnsemble, max_iter: int = 5000, restarts: int = 5, seed: int = 0
) -> DeltaResult:
    """Delta = 1 - min over priors of Tr sqrt(sum_i p_i^2 rho_i^2).

    Projected subgradient descent with backtracking over the probability
    simplex; the linearization gap over the simplex certifies optimality
    (the objective is convex).
    """
    k = ens.size
    stack = np.stack([s.matrix for s in ens.states])
    rng = np.random.default_rng(seed)
    best_val = np.inf
    best_p = np.full(k, 1.0 / k)
    best_gap = np.inf
    for r in range(restarts):
        if r == 0:
            p = np.full(k, 1.0 / k)
        else:
            p = kernels.simplex_project(rng.normal(size=k) * 0.5 + 1.0 / k)
        val, grad = _delta_objective(stack, p)
        eta = 0.5
        gap = np.inf
        for _it in range(max_iter):
            gap = float(np.dot(grad, p) - np.min(grad))
            if gap <= SIMPLEX_GAP_TOL:
                break
            accepted = False
            for _t in range(30):
                p_try = kernels.simplex_project(p - eta * grad)
                val_try, grad_try = _delta_objective(stack, p_try)
                if val_try < val - 1e-15:
                    p, val, grad = p_try, val_try, grad_try
                    accepted = True
                    break
                eta *= 0.5
                if eta < 1e-16:
                    break
            if not accepted:
                break
            eta = min(eta * 1.6, 2.0)
        # conditional-gradient polish: line searches toward the most
        # promising vertex shave the remaining linearization gap
        for _it in range(80):
            gap = float(np.dot(grad, p) - np.min(grad))
            if gap <= SIMPLEX_GAP_TOL:
                break
            vertex = np.zeros(k)
            vertex[int(np.argmin(grad))] = 1.0
            direction = vertex - p
            lo, hi = 0.0, 1.0
            for _g in range(48):
                m1 = lo + 0.381966011 * (hi - lo)
                m2 = hi - 0.381966011 * (hi - lo)
                v1, _ = _delta_objective(stack, p + m1 * direction)
                v2, _ = _delta_objective(stack, p + m2 * direction)
                if v1 < v2:
                    hi = m2
                else:
                    lo = m1
            step = 0.5 * (lo + hi)
            p_try = kernels.simplex_project(p + step * direction)
            val_try, grad_try = _delta_objective(stack, p_try)
            if val_try >= val - 1e-16:
                break
            p, val, grad = p_try, val_try, grad_try
        if val < best_val - 1e-12 or (abs(val - best_val) <= 1e-12 and gap < best_gap):
            best_val = min(val, best_val)
            best_p = p
            best_gap = gap
    return DeltaResult(float(1.0 - min(best_val, 1.0)), best_p, bool(best_gap <= SIMPLEX_GAP_TOL))


class ErrorBracket(NamedTuple):
    err_lower: float
    err_upper: float


def success_probability_bounds(ens: StateEnsemble, **kwargs) -> ErrorBracket:
    """Bracket on the minimax error min_POVM max_i [1 - Tr(rho_i A_i)]."""
    res = delta_estimate(ens, **kwargs)
    if not res.converged:
        raise NoConvergence("prior optimization did not certify its gap")
    d = res.delta
    return ErrorBracket(0.5 * d - d * d / 16.0, 2.0 * d - d * d)
