"""Neural-network approximators for Gaussian-mixture discriminants.

Builds, from an explicit mixture specification, the two-hidden-layer
approximation of each class discriminant (plus exact-activation and ReLU
variants) and the competing single-hidden-layer constructions, and
verifies the associated accuracy guarantees by exact oracles and seeded
Monte Carlo at desk scale.
"""

from .errors import (
    AssumptionNotVerified,
    AssumptionViolated,
    DeltaOutOfRange,
    DimensionMismatch,
    GmmNetsError,
    NonFiniteIntermediate,
    NotPositiveDefinite,
    ParseError,
    QOutOfRange,
    SpecValidationError,
)
from .gmm import (
    DiscriminantHandle,
    GaussianComponent,
    GmmClass,
    GmmSpec,
    factor_component,
    load_gmm_spec,
    parse_gmm_spec,
    save_gmm_spec,
)
from .network import (
    Activation,
    ActivationProfile,
    FeedforwardNet,
    Layer,
    check_assumptions,
    cosine_activation,
    count_nodes,
    deserialize_net,
    load_net,
    save_net,
    serialize_net,
)
from .construction import (
    ComponentPlan,
    ConstructionParams,
    build_class_network,
    build_reference_network,
    build_relu_network,
    build_supernode_negexp,
    build_supernode_square,
    default_sigmoid_profile,
    node_scaling_sweep,
    solve_params,
    solve_tstar,
    standard_gaussian_spec,
)
from .metrics import (
    ApproxReport,
    EmpiricalErrorReport,
    dq_to_l2_epsilon,
    empirical_error,
    error_rate_bound,
    net_classifier,
    verify_dq,
)
from .shallow import (
    L2Report,
    ShallowBoundReport,
    ShallowProblem,
    build_cosine_snn,
    estimate_l2_error,
    eval_lower_bound,
    gaussian_sampler,
    mu_c,
    verify_snn_bound,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
