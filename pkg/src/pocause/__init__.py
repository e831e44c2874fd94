"""Probabilities of causation for continuous and vector-valued data.

Point estimands (necessity, sufficiency, both at once), their
evidence-conditioned and multi-step variants, conditional CDF estimators
to feed them, bootstrap intervals, and simulators with brute-force
counterfactual oracles to validate the whole chain against.
"""

from .bootstrap import BootstrapResult, bootstrap
from .bundled import (
    bundled_query_names,
    bundled_spec_names,
    packaged_query_path,
    packaged_spec_path,
)
from .cdf import (
    EmpiricalCdf,
    LogisticCdf,
    LogisticModel,
    RhoPair,
    estimate_rho_pair,
    fit_logistic,
)
from .dataset import (
    DataTable,
    TableSchema,
    Variable,
    binarize_outcome,
    load_schema,
    load_table,
    save_table,
    schema_from_dict,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateError,
    MissingValueError,
    NoSupportError,
    NotIdentifiedError,
    PocError,
    SchemaError,
    SeparationError,
    SingularError,
)
from .estimands import (
    CovariateRow,
    EstimatorConfig,
    Evidence,
    PoCEstimate,
    PoCQuery,
    binary_poc,
    build_estimator,
    evaluate_query,
    load_query,
    marginal_pns,
    pn_point,
    pns_evidence_point,
    pns_multi_evidence_point,
    pns_multi_point,
    pns_point,
    ps_point,
    query_as_dict,
    query_from_dict,
)
from .ordering import (
    Lexicographic,
    Ordering,
    OrderSpec,
    ScalarScore,
    compare,
    indicator_below,
    lexicographic_default,
    order_from_dict,
    precedes_or_equal,
    strictly_precedes,
)
from .scm import (
    Additive,
    CfClause,
    CounterfactualEvent,
    CovariateDist,
    GaussianDiag,
    LinearMean,
    MonotonicityReport,
    NonMonotoneTest,
    OracleResult,
    ScmSpec,
    TabularMean,
    TrajectorySet,
    TreatmentPolicy,
    UniformBox,
    check_monotonicity,
    derived_rng,
    export_trajectories,
    flip_event,
    load_scm,
    monotonicity_probe,
    oracle_evidence,
    oracle_joint,
    scm_from_dict,
    simulate,
)
from .student import (
    StudentReport,
    format_student_report,
    load_student_table,
    reproduce_student,
    study_queries,
)

__version__ = "0.1.0"

__all__ = [
    "Additive",
    "BootstrapResult",
    "CfClause",
    "ConfigError",
    "CounterfactualEvent",
    "CovariateDist",
    "CovariateRow",
    "DataError",
    "DataTable",
    "DegenerateError",
    "EmpiricalCdf",
    "EstimatorConfig",
    "Evidence",
    "GaussianDiag",
    "Lexicographic",
    "LinearMean",
    "LogisticCdf",
    "LogisticModel",
    "MissingValueError",
    "MonotonicityReport",
    "NoSupportError",
    "NonMonotoneTest",
    "NotIdentifiedError",
    "OracleResult",
    "OrderSpec",
    "Ordering",
    "PoCEstimate",
    "PoCQuery",
    "PocError",
    "RhoPair",
    "ScalarScore",
    "SchemaError",
    "ScmSpec",
    "SeparationError",
    "SingularError",
    "StudentReport",
    "TableSchema",
    "TabularMean",
    "TrajectorySet",
    "TreatmentPolicy",
    "UniformBox",
    "Variable",
    "binarize_outcome",
    "binary_poc",
    "bootstrap",
    "build_estimator",
    "bundled_query_names",
    "bundled_spec_names",
    "check_monotonicity",
    "compare",
    "derived_rng",
    "estimate_rho_pair",
    "evaluate_query",
    "export_trajectories",
    "fit_logistic",
    "flip_event",
    "format_student_report",
    "indicator_below",
    "lexicographic_default",
    "load_query",
    "load_schema",
    "load_scm",
    "load_student_table",
    "load_table",
    "marginal_pns",
    "monotonicity_probe",
    "oracle_evidence",
    "oracle_joint",
    "order_from_dict",
    "packaged_query_path",
    "packaged_spec_path",
    "pn_point",
    "pns_evidence_point",
    "pns_multi_evidence_point",
    "pns_multi_point",
    "pns_point",
    "precedes_or_equal",
    "ps_point",
    "query_as_dict",
    "query_from_dict",
    "reproduce_student",
    "save_table",
    "schema_from_dict",
    "scm_from_dict",
    "simulate",
    "strictly_precedes",
    "study_queries",
]
