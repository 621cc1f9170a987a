"""Comparison methods: greedy forward selection and iterative re-solving."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

from . import diagnostics, linalg
from .altsol import AltCandidate, penalty_score
from .data import Dataset
from .diagnostics import DiagnosticsReport, RankDeficientFitError
from .solver import (
    ConfigError,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    solve_base,
)


def forward_select(dataset: Dataset, k: int) -> tuple[int, ...]:
    """Greedy forward selection over the log-augmented columns.

    At each step the candidate column giving the smallest MSE of the enlarged
    fit is added, after which both that column and its log pair leave the
    candidate pool, so the result is always pair-legal.  Ties go to the
    lowest column index.
    """
    if not 1 <= k <= dataset.m:
        raise ConfigError(f"k={k} outside 1..{dataset.m}")
    candidates = set(range(2 * dataset.m))
    selected: list[int] = []
    for _ in range(k):
        best_column = None
        best_sse = float("inf")
        for j in sorted(candidates):
            _, sse = linalg.subset_sse(dataset, selected + [j])
            if sse < best_sse - 1e-15:
                best_sse = sse
                best_column = j
        if best_column is None:
            raise ConfigError("candidate pool exhausted")  # unreachable for k <= m
        selected.append(best_column)
        candidates -= {best_column, dataset.pair(best_column)}
    return tuple(sorted(selected))


@dataclass(frozen=True)
class IterationRecord:
    subset: tuple[int, ...]
    diagnostics: Optional[DiagnosticsReport]
    cut_added: bool


@dataclass(frozen=True)
class IterTrace:
    """What each round of the iterative algorithm saw and did."""

    iterations: tuple[IterationRecord, ...]
    solver_calls: int


def solve_iterative(
    dataset: Dataset, k: int, cfg: SolverConfig | None = None
) -> tuple[SolveOutcome, IterTrace]:
    """Repeatedly solve the unconstrained problem, cutting away any winner
    with insignificant coefficients, until one passes the t-tests.

    Only coefficient significance is enforced (no residual tests).  On
    timeout, or if the cuts exhaust every subset, the last examined subset is
    reported as the alternative.
    """
    cfg = cfg or SolverConfig()
    start = time.monotonic()
    deadline = start + cfg.time_limit

    cuts: set[tuple[int, ...]] = set()
    records: list[IterationRecord] = []
    nodes_total = 0
    solver_calls = 0
    exhausted = False

    while True:
        remaining = max(deadline - time.monotonic(), 0.0)
        inner = solve_base(
            dataset, k, replace(cfg, time_limit=remaining), excluded=frozenset(cuts)
        )
        solver_calls += 1
        nodes_total += inner.nodes_explored
        if inner.subset is None:
            exhausted = True  # every subset has been cut away
            break

        try:
            report = diagnostics.run_diagnostics(
                dataset, inner.fit, cfg.significance, residual_tests=False
            )
        except RankDeficientFitError:
            report = None
        significant = report is not None and report.n_insignificant == 0

        if significant:
            records.append(IterationRecord(inner.subset, report, cut_added=False))
            status = (
                SolveStatus.OPTIMAL
                if inner.status == SolveStatus.OPTIMAL
                else SolveStatus.BEST_FEASIBLE
            )
            outcome = SolveOutcome(
                status=status,
                subset=inner.subset,
                fit=inner.fit,
                diagnostics=report,
                alternative=None,
                alternative_score=None,
                nodes_explored=nodes_total,
                cuts_added=len(cuts),
                cut_pool=frozenset(cuts),
                bound_context=None,
                wall_time=time.monotonic() - start,
            )
            return outcome, IterTrace(tuple(records), solver_calls=solver_calls)

        cuts.add(inner.subset)
        records.append(IterationRecord(inner.subset, report, cut_added=True))
        if time.monotonic() >= deadline:
            break

    # No subset with all-significant coefficients was found.
    alternative = None
    if records:
        last = records[-1]
        if last.diagnostics is not None:
            fit = linalg.ols_fit(dataset, last.subset)
            alternative = AltCandidate.from_fit(fit, last.diagnostics)
    status = (
        SolveStatus.INFEASIBLE_WITH_ALTERNATIVE
        if exhausted
        else SolveStatus.ALTERNATIVE
    )
    score = None
    if alternative is not None:
        score = penalty_score(alternative, cfg.penalties, cfg.significance)
    outcome = SolveOutcome(
        status=status,
        subset=None,
        fit=None,
        diagnostics=None,
        alternative=alternative,
        alternative_score=score,
        nodes_explored=nodes_total,
        cuts_added=len(cuts),
        cut_pool=frozenset(cuts),
        bound_context=None,
        wall_time=time.monotonic() - start,
    )
    return outcome, IterTrace(tuple(records), solver_calls=solver_calls)
