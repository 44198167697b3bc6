"""Splitting methods for nonconvex composite problems ``min h(x) + P(M x)``."""

from .admm import (
    AdmmConfig,
    AdmmReport,
    AssumptionReport,
    BetaHeuristic,
    admm_solve,
    augmented_lagrangian,
    check_assumption,
    check_boundedness,
    stationarity_residuals,
    suggest_beta,
    warm_start_from_l1,
)
from .core import (
    DenseOperator,
    FirstDifference,
    IdentityOperator,
    LinearOperator,
    SpdSystem,
    lambda_max_gram,
    lambda_min_gram_out,
    spd_solve,
)
from .pg import PgConfig, PgReport, estimate_ell, pg_solve
from .prox import (
    Cardinality,
    FiniteSet,
    L0Ball,
    L0Penalty,
    L1Ball,
    L1Penalty,
    LHalfPenalty,
    LinfBall,
    ProxOperator,
)
from .rng import RngStream
from .smooth import (
    IndefiniteQuadratic,
    LeastSquares,
    NegatedLeastSquares,
    ProximalTerm,
    Proximity,
    SmoothFunction,
    bregman_value,
)

__all__ = [
    "AdmmConfig",
    "AdmmReport",
    "AssumptionReport",
    "BetaHeuristic",
    "admm_solve",
    "augmented_lagrangian",
    "check_assumption",
    "check_boundedness",
    "stationarity_residuals",
    "suggest_beta",
    "warm_start_from_l1",
    "DenseOperator",
    "FirstDifference",
    "IdentityOperator",
    "LinearOperator",
    "SpdSystem",
    "lambda_max_gram",
    "lambda_min_gram_out",
    "spd_solve",
    "Cardinality",
    "FiniteSet",
    "L0Ball",
    "L0Penalty",
    "L1Ball",
    "L1Penalty",
    "LHalfPenalty",
    "LinfBall",
    "ProxOperator",
    "IndefiniteQuadratic",
    "LeastSquares",
    "NegatedLeastSquares",
    "ProximalTerm",
    "Proximity",
    "SmoothFunction",
    "bregman_value",
    "PgConfig",
    "PgReport",
    "estimate_ell",
    "pg_solve",
    "RngStream",
]

__version__ = "0.1.0"
