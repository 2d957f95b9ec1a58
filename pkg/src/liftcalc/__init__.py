"""Exact obstruction calculus for lifting chain maps along small
extensions of finite local rings, with an exhaustive oracle and a
desk-scale run of the uniqueness theorem for decomposition triangles.
"""

from .rings import (
    FAMILY_INTEGERS_MOD,
    FAMILY_TRUNCATED_POLY,
    BRankUnsupported,
    FamilyMismatch,
    LevelError,
    LocalRing,
    NonFieldBase,
    NotInB,
    NotSmallExtension,
    Tower,
    TowerError,
    TowerLadder,
    ladder_from_ring,
    make_tower,
    make_tower_from_descriptors,
    parse_ring,
)
from .linalg import Matrix, Subspace, DimensionMismatch, block_matrix, kernel_field, \
    mat_lift, mat_reduce, rref_field, smith_diagonalize, solve_field, solve_ring
from .coeffs import TRIVIAL, AlgebraCoefficients, TrivialCoefficients
from .typedmat import TypedMat, matrix_from_typed, typed_from_matrix
from .complexes import (
    ChainMap,
    CohomologyData,
    Complex,
    Equivalence,
    FlatComplex,
    Homotopy,
    HomComplex,
    LevelMismatch,
    NotAComplex,
    NotACocycle,
    check_complex,
    cohomology,
    complex_cohomology,
    cone,
    cylinder_factor,
    direct_sum,
    hom_complex,
    homotopic,
    homotopy_equivalent_field,
    is_acyclic_at_level,
    minimize,
    null_homotopy_solve,
)
from .obstruction import (
    DefectPair,
    FaithfulClass,
    GradedLift,
    InternalCocycleFailure,
    LiftIsomorphism,
    LiftProblem,
    LiftSet,
    LiftSolution,
    ObstructionClass,
    ObstructionNonzero,
    PresentationUnavailable,
    PresentedProblem,
    classify_lifts,
    correct_lift,
    defect_pair,
    faithful_class,
    h0_action,
    lifts_equivalent,
    make_lift_problem,
    mu_transport,
    naive_lift,
    object_deformation_class,
    obstruction_class,
    present,
)
from .oracle import BoundsExceeded, SearchBounds, count_classes, enumerate_lifts, \
    object_obstruction_oracle
from .applications import (
    Algebra,
    DecompositionTriangle,
    LiftObstructed,
    NotSemiorthogonal,
    TowerRunResult,
    UniquenessFailure,
    a2_algebra,
    a2_setup,
    build_a2_sod,
    check_semiorthogonality,
    diagonal_resolution,
    tensor_generator,
    tower_lift,
    uniqueness_certificate,
)
from .scenario import CONVENTIONS_VERSION, ParseError, Scenario, ValidationError, \
    parse_scenario, run

__version__ = "0.1.0"
