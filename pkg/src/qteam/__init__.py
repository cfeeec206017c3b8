"""Optimal classical, no-signalling, and entangled-qubit strategies for
binary team decision problems, with closed-form advantage thresholds for
the symmetric-prior coordination family and brute-force oracles that
validate every closed form."""

from .core import (
    AmbiguousSignError,
    DegeneratePriorError,
    Error,
    OccupationMeasure,
    SymPrior,
    TeamInstance,
    UnsupportedClassError,
    ValidationError,
    cac_instance,
    classify_matrices,
    detect_sym_prior,
    expected_cost,
    expected_cost_coordination_form,
    half_cac_instance,
    kappa,
    load_instance,
    parse_instance,
    validate_instance,
)
from .classical import (
    ALL_DETERMINISTIC_POLICIES,
    DeterministicPolicy,
    classical_optimum,
    deterministic_occupation,
    sym_classical_optimum,
)
from .nosignalling import (
    ALL_NS_VERTICES,
    ChiInterval,
    NSVertex,
    no_signalling_residual,
    ns_bounds_cac,
    ns_bounds_for_instance,
    ns_bounds_half_cac,
    ns_optimum,
    ns_vertex_cost,
    ns_vertex_occupation,
    orbit_transform,
    reciprocal_interval,
)
from .quantum import (
    ActionAssignment,
    PureTwoQubitState,
    QubitStrategy,
    all_assignments,
    canonicalize_angles,
    canonicalize_strategy,
    case1_assignments,
    equal_action_probability,
    load_strategy,
    measurement_basis,
    occupation_from_state,
    occupation_from_table,
    occupation_from_trace,
    parse_strategy,
    schmidt_reduce,
    shared_state,
)
from .optimizer import (
    OptimizerConfig,
    ThresholdReport,
    advantage_gap,
    f_bar,
    full_quantum_optimum,
    j_bar,
    j_underbar,
    optimal_assignment,
    restricted_gap,
    stationarity_check,
    sym_optimal_angles,
    sym_quantum_optimum,
    thresholds,
    thresholds_from_raw,
    vertex_minimum_check,
)

__version__ = "0.1.0"
