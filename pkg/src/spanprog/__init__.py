"""Span-program toolkit.

Core objects and conversions between span programs, phase-estimation-based
decision procedures, bounded-error query algorithms, and the pattern-matrix
lower-bound machinery.
"""
from .errors import (
    BoundViolated,
    BoundViolation,
    MalformedProgram,
    NotBoundedError,
    ToolkitError,
    ValidationError,
)
from .numerics import DEFAULT_POLICY, TolerancePolicy, unitary_eig
from .span_core import (
    ComplexityReport,
    SpanProgram,
    complexity_report,
    evaluate,
    min_error_witness,
    negative_witness,
    normalize,
    or_program,
    positive_witness,
    realify,
    reduce_kappa,
    scale,
    tensor_square,
    validate,
)
from .qsim import CompiledDecider, compile_program, decide, esg_check
from .query_alg import (
    QueryAlgorithm,
    alg_to_span,
    deutsch_algorithm,
    grover_query_algorithm,
    noisy_deutsch,
    run,
    verify_conversion,
)
from .monotone import (
    PhaseEstimationAlgorithm,
    grover,
    is_monotone,
    pea_to_span,
    span_to_pea,
    verify_pe_bounds,
)
from .bounds import (
    BooleanFunctionTable,
    approx_degree,
    assignment_bound,
    certificate_bound,
    fourier,
    lambda_extract,
    pattern_matrix,
    sherstov_rank,
)

__version__ = "0.1.0"
