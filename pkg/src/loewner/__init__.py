"""Matrix monotonicity on commuting tuples: certificates, realizations, trials.

The package decides, at finitely many sample points, whether a function of d
real variables acts monotonically on commuting tuples of Hermitian matrices:
it either produces positive semidefinite kernels certifying the first-order
inequalities or extracts a perturbation direction witnessing their failure.
Alongside the decision procedure it carries the structure theory: transfer
realizations over graded spaces, their self-adjoint and Cauchy forms, and a
randomized harness exercising the monotonicity statements on matrix tuples.
"""

from .errors import (
    DegenerateBox,
    DegenerateNodes,
    DiagonalizationFailed,
    DimensionMismatch,
    DomainViolation,
    InconsistentDirection,
    InternalCheckFailed,
    LoewnerError,
    NonHermitian,
    NotCommuting,
    NotGeneric,
    NotSkewSymmetric,
    NotUnitary,
    PoleHit,
    RealityViolation,
    RetryExhausted,
    SchemaError,
    ShapeMismatch,
    SingularLiftedResolvent,
    SingularResolvent,
    TauTooCloseToSpectrum,
)
from .linalg import (
    DEFAULT_TOL,
    GradedSpace,
    Tolerances,
    eig_hermitian,
    graded_sum,
    loewner_leq,
    min_eigenvalue,
    require_hermitian,
    schur_product,
)
from .tuples import (
    CommutingTuple,
    Direction,
    JointSpectrum,
    SmoothFunction,
    commuting_tuple,
    direction,
    directional_derivative,
    joint_diagonalize,
)
from .certify import (
    Inconclusive,
    LoewnerCertificate,
    Refutation,
    SampledFunction,
    certify,
    loewner_matrix_1d,
    node_tuple,
    refutation_witness,
    sample,
    sampled_function,
    verify_certificate,
)
from .realize import (
    BoundarySum,
    CauchyRealization,
    DiscreteMeasure,
    SelfAdjointRealization,
    TransferRealization,
    bpoint_check,
    bpoint_sum,
    complete_to_unitary,
    discrete_measure,
    eval_cauchy,
    eval_on_tuple,
    eval_selfadjoint,
    from_discrete_measure,
    herglotz_eval,
    in_mu_spectrum,
    lifted_pencil,
    mobius_alpha,
    mobius_beta,
    mobius_rho,
    mu_resolvent_norm,
    reduce_to_cauchy,
    rescale_to_box,
    synthesize_selfadjoint,
    transfer_eval,
    transfer_realization,
)
from .harness import (
    TrialConfig,
    TrialReport,
    admissible_direction,
    canonical_realization,
    intermediate_search,
    random_commuting_tuple,
    random_ordered_pair,
    run_fuzz,
)
from .serialize import (
    canonical_dumps,
    load_measure,
    load_realization,
    load_sampled_function,
    save_measure,
    save_realization,
    save_sampled_function,
)

__version__ = "0.1.0"
