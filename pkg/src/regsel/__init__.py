"""Best-subset linear regression with statistical-validity constraints.

Selects the k-column subset (drawing from every feature and its log
transform, never both members of a pair) that minimizes the squared error by
exact branch-and-bound, while enforcing coefficient t-tests, a residual
linearity check, and heteroscedasticity tests as lazy cuts.  When no subset
passes everything, the search reports a principled near-feasible alternative.
"""

from .altsol import (
    AltCandidate,
    PenaltyParams,
    better_by_score,
    better_with_tolerance,
    penalty_score,
    scaled_overshoot,
    scaled_shortfall,
    update_alternative,
    update_alternative_by_score,
)
from .baselines import IterTrace, forward_select, solve_iterative
from .bounds import (
    BoundContext,
    RelaxationResult,
    build_bound_context,
    estimate_big_m,
    mse_lower_bound,
    relaxed_ttest_filter,
)
from .data import (
    Dataset,
    RawTable,
    TableError,
    dataset_from_arrays,
    load_table,
    preprocess,
    transform_like,
)
from .diagnostics import (
    DiagnosticsError,
    DiagnosticsReport,
    RankDeficientFitError,
    SignificanceConfig,
    abs_residual_test,
    breusch_pagan_test,
    chi_square_sf,
    coef_t_tests,
    linearity_test,
    run_diagnostics,
    slope_test,
    student_t_two_sided_critical,
    student_t_two_sided_pvalue,
)
from .estimator import BestSubsetRegressor
from .linalg import (
    DegreesOfFreedomError,
    FitResult,
    adjusted_r2,
    ols_fit,
    vif,
)
from .metrics import ComparisonRow, rep, residual_plot_data, summarize
from .solver import (
    ConfigError,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    check_candidate,
    node_bound,
    solve_base,
    solve_lazy,
    solve_penalty,
)

__version__ = "0.1.0"

__all__ = [
    "AltCandidate",
    "BestSubsetRegressor",
    "BoundContext",
    "ComparisonRow",
    "ConfigError",
    "Dataset",
    "DegreesOfFreedomError",
    "DiagnosticsError",
    "DiagnosticsReport",
    "FitResult",
    "IterTrace",
    "PenaltyParams",
    "RankDeficientFitError",
    "RawTable",
    "RelaxationResult",
    "SignificanceConfig",
    "SolveOutcome",
    "SolveStatus",
    "SolverConfig",
    "TableError",
    "abs_residual_test",
    "adjusted_r2",
    "better_by_score",
    "better_with_tolerance",
    "breusch_pagan_test",
    "build_bound_context",
    "check_candidate",
    "chi_square_sf",
    "coef_t_tests",
    "dataset_from_arrays",
    "estimate_big_m",
    "forward_select",
    "linearity_test",
    "load_table",
    "mse_lower_bound",
    "node_bound",
    "ols_fit",
    "penalty_score",
    "preprocess",
    "relaxed_ttest_filter",
    "rep",
    "residual_plot_data",
    "run_diagnostics",
    "scaled_overshoot",
    "scaled_shortfall",
    "slope_test",
    "solve_base",
    "solve_iterative",
    "solve_lazy",
    "solve_penalty",
    "summarize",
    "student_t_two_sided_critical",
    "student_t_two_sided_pvalue",
    "transform_like",
    "update_alternative",
    "update_alternative_by_score",
    "vif",
]
