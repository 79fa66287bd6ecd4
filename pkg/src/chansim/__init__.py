"""chansim: worst-case fidelity bounds and near-optimal recovery channels.

The library compares a noisy channel against a target through their
complementary channels, turning the hard minimax over recovery operations
into a convex trace-norm minimization over input states.  It computes the
resulting two-sided bounds, builds the recovery channel from the polar data
of the minimizer, tests exact correctability, and specializes the same
machinery to minimax state discrimination.
"""

from .channels import (
    BlockAlgebra,
    Isometry,
    KrausChannel,
    algebra_projector,
    amplitude_damping_channel,
    apply,
    canonicalize,
    channels_equal,
    choi,
    choi_distance,
    commutant,
    complementary,
    complete_to_tp,
    completely_dephasing_channel,
    compose,
    constant_channel,
    dephasing_channel,
    depolarizing_channel,
    dual_apply,
    encode_then_noise,
    identity_channel,
    minimal_kraus_count,
    mixed_dephasing_channel,
    postprocessing_oracle,
    stinespring_isometry,
    tensor_channels,
    trace_channel,
    unitary_channel,
)
from .discrimination import (
    Povm,
    StateEnsemble,
    delta_estimate,
    ensemble,
    measurement_channel,
    preparation_channel,
    success_probability_bounds,
)
# the scalar fidelity itself lives at chansim.fidelity.fidelity, so the
# submodule name keeps pointing at the module
from .fidelity import (
    DensityOperator,
    as_density,
    channel_distance,
    entanglement_fidelity,
    purify,
    worst_case_fidelity,
)
from .linalg_core import (
    EigenDecomposition,
    PolarDecomposition,
    hermitian_eig,
    matrix_sqrt_psd,
    partial_trace,
    polar_decompose,
    pseudo_inverse_sqrt,
    tensor,
    trace_norm,
)
from .oracles import (
    OracleResult,
    brute_force_povm_minimax,
    duality_check,
    robustness_check,
    seesaw_max_fidelity,
)
from .qec import (
    CodeSpec,
    algebra_correctable_check,
    exact_recovery_from_kl,
    knill_laflamme_check,
)
from .recovery import (
    RecoveryReport,
    SimulationProblem,
    f0,
    fixed_state_bounds,
    minimize_f0,
    near_optimal_recovery,
    nearby_correctable,
    phi_map,
    sandwich_bounds,
    transpose_channel,
    tyson_channel,
    x_operator,
)

__version__ = "0.1.0"
