"""fatpoints: exact non-specialty verification of fat-point linear systems on P^3.

Rank checks of interpolation matrices over a prime field, the glueing
reduction that shrinks the case lists, and replayable certificates for the
degree sweeps.
"""

from ._version import __version__
from .model import (
    CaseSignature,
    DimensionReport,
    SystemSpec,
    binomial,
    conditions_count,
    edim,
    parse_mults,
    parse_system,
    vdim,
)
from .monomials import derivative_coefficient, derivative_orders, monomial_basis
from .gfp import (
    DEFAULT_PRIME,
    PRIME_LADDER,
    FieldPrime,
    active_backend,
    is_prime,
    rank,
    rank_blocked,
)
from .interpolation import (
    Certificate,
    MatrixTooLargeError,
    build_matrix,
    check_case,
    rational_oracle,
    reduce_fundamental,
    replay_certificate,
    report_from_certificate,
    sample_points,
)
from .enumeration import (
    QPolicy,
    WindowSpec,
    algorithm_a_cases,
    algorithm_b_cases,
    count_algorithm_a,
    count_algorithm_b,
    in_window,
)
from .reduction import (
    CATALOGUE,
    ClosureReport,
    DeduceResult,
    GlueRule,
    KnownResults,
    closure_audit,
    deduce,
    glue_reduce,
    validate_glue_rule,
)
from .campaign import (
    CampaignConfig,
    ResultStore,
    VerifyReport,
    run_campaign,
    status,
    verify_log,
)

__all__ = [
    "__version__",
    "CaseSignature",
    "DimensionReport",
    "SystemSpec",
    "binomial",
    "conditions_count",
    "edim",
    "parse_mults",
    "parse_system",
    "vdim",
    "derivative_coefficient",
    "derivative_orders",
    "monomial_basis",
    "DEFAULT_PRIME",
    "PRIME_LADDER",
    "FieldPrime",
    "active_backend",
    "is_prime",
    "rank",
    "rank_blocked",
    "Certificate",
    "MatrixTooLargeError",
    "build_matrix",
    "check_case",
    "rational_oracle",
    "reduce_fundamental",
    "replay_certificate",
    "report_from_certificate",
    "sample_points",
    "QPolicy",
    "WindowSpec",
    "algorithm_a_cases",
    "algorithm_b_cases",
    "count_algorithm_a",
    "count_algorithm_b",
    "in_window",
    "CATALOGUE",
    "ClosureReport",
    "DeduceResult",
    "GlueRule",
    "KnownResults",
    "closure_audit",
    "deduce",
    "glue_reduce",
    "validate_glue_rule",
    "CampaignConfig",
    "ResultStore",
    "VerifyReport",
    "run_campaign",
    "status",
    "verify_log",
]
