"""Cross-method comparison measures and residual-plot data extraction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg
from .data import Dataset
from .linalg import FitResult
from .solver import SolveOutcome


@dataclass(frozen=True)
class ComparisonRow:
    """One method's result on one (dataset, k) case, in report-table form.

    ``rep`` is this method's adjusted R-squared divided by the unconstrained
    solve's, so the unconstrained method itself always reports 1.  It is
    ``None`` when the base adjusted R-squared is not positive.
    """

    dataset_id: str
    k: int
    method: str
    status: str
    adjusted_r2: Optional[float]
    rep: Optional[float]
    n_insignificant: Optional[int]
    insig_pvalue_mean: Optional[float]
    linearity_pvalue: Optional[float]
    hetero_pvalue: Optional[float]
    wall_time: float


def reporting_fit(dataset: Dataset, outcome: SolveOutcome) -> Optional[FitResult]:
    """The fit a run is reported with: its winner, else its alternative refit."""
    if outcome.fit is not None:
        return outcome.fit
    if outcome.alternative is not None:
        return linalg.ols_fit(dataset, outcome.alternative.subset)
    return None


def outcome_adjusted_r2(dataset: Dataset, outcome: SolveOutcome) -> Optional[float]:
    fit = reporting_fit(dataset, outcome)
    if fit is None:
        return None
    return linalg.adjusted_r2(fit.sse, fit.n, fit.k)


def rep(
    method_outcome: SolveOutcome,
    base_outcome: SolveOutcome,
    dataset: Dataset,
) -> Optional[float]:
    """Relative explanatory power against the unconstrained solve.

    Undefined (``None``) when either side has no reportable fit or the base
    adjusted R-squared is not positive.
    """
    method_r2 = outcome_adjusted_r2(dataset, method_outcome)
    base_r2 = outcome_adjusted_r2(dataset, base_outcome)
    if method_r2 is None or base_r2 is None or base_r2 <= 0.0:
        return None
    return method_r2 / base_r2


def residual_plot_data(fit: FitResult) -> np.ndarray:
    """(fitted, residual, |residual|) rows in observation order."""
    return np.column_stack([fit.fitted, fit.residuals, np.abs(fit.residuals)])


#: Statuses under which a run produced a model passing every enforced test.
FEASIBLE_STATUSES = frozenset({"optimal", "best_feasible"})


def summarize(rows: list[ComparisonRow]) -> dict:
    """Aggregate comparison rows per method.

    For each method: status counts, the average relative explanatory power
    over all cases with a defined value, and the feasible-only average that
    skips cases whose run ended without a fully valid model.
    """
    methods: dict[str, dict] = {}
    for row in rows:
        entry = methods.setdefault(
            row.method,
            {"n_cases": 0, "status_counts": {}, "_rep": [], "_rep_feas": []},
        )
        entry["n_cases"] += 1
        entry["status_counts"][row.status] = (
            entry["status_counts"].get(row.status, 0) + 1
        )
        if row.rep is not None:
            entry["_rep"].append(row.rep)
            if row.status in FEASIBLE_STATUSES:
                entry["_rep_feas"].append(row.rep)
    for entry in methods.values():
        rep_values = entry.pop("_rep")
        feas_values = entry.pop("_rep_feas")
        entry["rep_mean"] = sum(rep_values) / len(rep_values) if rep_values else None
        entry["rep_feas_mean"] = (
            sum(feas_values) / len(feas_values) if feas_values else None
        )
        entry["n_feasible"] = len(feas_values)
    return methods
