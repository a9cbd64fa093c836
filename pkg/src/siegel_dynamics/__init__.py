"""Iteration of holomorphic self-maps of the unit ball and Siegel domain.

Submodules: geometry (metrics, Cayley transform, automorphisms), maps
(evaluable self-map families), dynamics (orbits, multipliers, quantitative
checks), conjugation (linear models at repelling boundary points),
serialize (JSON/CSV), cli (command-line front end).
"""

from .policy import DEFAULT_POLICY, NumericPolicy
from .errors import (
    ConstructionFailed,
    DimensionMismatch,
    InvalidDescriptor,
    InvalidPoint,
    ModelMismatch,
    NoBackwardStep,
    OrbitTooShort,
    SiegelDynamicsError,
    SolverFailure,
)
from .geometry import (
    BallPoint,
    BoundaryPoint,
    CVector,
    Horosphere,
    KoranyiRegion,
    SiegelAutomorphism,
    SiegelPoint,
    apply_automorphism,
    build_automorphism,
    cayley_to_siegel,
    compose_automorphisms,
    defect,
    dist_ball,
    dist_siegel,
    horosphere_contains,
    hyperbolic_ball_extremes,
    invert_automorphism,
    koranyi_contains,
    boundary_projection,
    siegel_to_ball,
)
from .maps import (
    BallProduct,
    BlaschkeDeg2,
    ClassificationReport,
    Conjugated,
    DiagonalLinear,
    DiskLinear,
    HalfPlaneAffine,
    HalfPlaneLinear,
    Lifted,
    QuadraticSiegel,
    classify_quadratic,
    evaluate,
    expandable_decompose,
    known_brfp_set,
    lift_one_dim,
    quadratic_inverse,
    quadratic_iterate_closed,
)
from .dynamics import (
    BackwardOrbit,
    ForwardOrbit,
    backward_orbit,
    backward_step,
    elliptic_growth_constant,
    forward_orbit,
    julia_inclusion_check,
    multiplier_at_boundary,
    orbit_asymptotics,
    verify_defect_decay,
)
from .conjugation import (
    ConjugationRun,
    build_tau,
    conjugation_residual,
    psi_approx,
    psi_interpolation_check,
    run_conjugation,
    special_backward_construct,
    tau_limit_diagnostics,
)

__version__ = "0.1.0"
