"""Shooting-method laboratory for radial bound states of a semilinear scalar field."""

from .classify import (
    BOUND_STATE_CANDIDATE,
    CONSTANT,
    INDETERMINATE,
    OSCILLATORY,
    AlphaLadder,
    BracketNotFound,
    LadderEntry,
    MonotonicityViolation,
    SolutionClass,
    Witness,
    ZeroMonotonicityReport,
    build_ladder,
    classify,
    find_alpha_k,
    node_count_of_alpha,
    zero_monotonicity_scan,
)
from .field import (
    CriticalAmplitudes,
    FieldParams,
    ParameterError,
    SingularInputError,
    big_F,
    big_F_a,
    critical_amplitudes,
    f,
    f_prime,
    g1,
    g2,
    kappa_a,
)
from .functionals import (
    IDENTITY_NAMES,
    AuxSample,
    BridgeIntegral,
    IdentityReport,
    IdentityResidual,
    MissingEvents,
    ParametricSample,
    ProbeUndefined,
    SingularityWarning,
    bridge_integral,
    eval_aux,
    eval_parametric,
    identity_residuals,
    probe_radii,
)
from .integrate import (
    CLASSIFY_POLICY,
    FULL_RANGE_POLICY,
    IntegratorControls,
    ProblemParams,
    State,
    StopPolicy,
    TerminationCause,
    Trajectory,
    integrate,
    rhs,
    series_start,
)
from .portrait import (
    AmbiguousEvent,
    IndeterminateCount,
    InflectionReport,
    InterlacingViolation,
    LabeledPoint,
    NodeCount,
    PhaseLabels,
    PhasePortrait,
    count_nodes,
    detect_events,
    find_zeros,
    unique_inflection_check,
)
from .verify import (
    CHECK_IDS,
    PRESETS,
    CaseSpec,
    CheckRecord,
    MalformedPlan,
    VerificationPlan,
    VerificationReport,
    default_cases,
    run_checks,
    truncate_for_structure,
)

__all__ = [
    "AlphaLadder",
    "AmbiguousEvent",
    "AuxSample",
    "BOUND_STATE_CANDIDATE",
    "BracketNotFound",
    "BridgeIntegral",
    "CHECK_IDS",
    "CLASSIFY_POLICY",
    "CONSTANT",
    "CaseSpec",
    "CheckRecord",
    "CriticalAmplitudes",
    "FULL_RANGE_POLICY",
    "FieldParams",
    "IDENTITY_NAMES",
    "INDETERMINATE",
    "IdentityReport",
    "IdentityResidual",
    "IndeterminateCount",
    "InflectionReport",
    "IntegratorControls",
    "InterlacingViolation",
    "LabeledPoint",
    "LadderEntry",
    "MalformedPlan",
    "MissingEvents",
    "MonotonicityViolation",
    "NodeCount",
    "OSCILLATORY",
    "PRESETS",
    "ParameterError",
    "ParametricSample",
    "PhaseLabels",
    "PhasePortrait",
    "ProbeUndefined",
    "ProblemParams",
    "SingularInputError",
    "SingularityWarning",
    "SolutionClass",
    "State",
    "StopPolicy",
    "TerminationCause",
    "Trajectory",
    "VerificationPlan",
    "VerificationReport",
    "Witness",
    "ZeroMonotonicityReport",
    "big_F",
    "big_F_a",
    "bridge_integral",
    "build_ladder",
    "classify",
    "count_nodes",
    "critical_amplitudes",
    "default_cases",
    "detect_events",
    "eval_aux",
    "eval_parametric",
    "f",
    "f_prime",
    "find_alpha_k",
    "find_zeros",
    "g1",
    "g2",
    "identity_residuals",
    "integrate",
    "kappa_a",
    "node_count_of_alpha",
    "probe_radii",
    "rhs",
    "run_checks",
    "series_start",
    "truncate_for_structure",
    "unique_inflection_check",
    "zero_monotonicity_scan",
]

__version__ = "0.1.0"
