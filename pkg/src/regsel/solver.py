"""Branch-and-bound search for the best pair-legal column subset.

The search branches on include/exclude decisions for individual columns.  A
node's lower bound is the SSE of the least-squares fit on all columns the
node could still use; since adding columns never increases the SSE, that fit
bounds every completion from below.  Nodes come off a best-first heap, so the
search can stop as soon as the cheapest open node cannot beat the incumbent.

Statistical validity enters lazily: each completed k-subset is fitted and
tested, and a failing subset is recorded in a cut pool (excluding exactly
that subset, since the cardinality is fixed) instead of becoming incumbent.
While no valid incumbent exists, failing candidates compete for the
alternative slot so that an infeasible run still yields a usable model.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import altsol, bounds, diagnostics, linalg
from .altsol import AltCandidate, PenaltyParams
from .bounds import BoundContext
from .data import Dataset
from .diagnostics import (
    DiagnosticsReport,
    RankDeficientFitError,
    SignificanceConfig,
)
from .linalg import DegreesOfFreedomError, FitResult

#: Bound/SSE comparisons treat differences at or below this as ties.
SSE_TIE_EPS = 1e-12


class ConfigError(ValueError):
    """Raised for solve requests that are invalid for the given dataset."""


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    BEST_FEASIBLE = "best_feasible"
    ALTERNATIVE = "alternative"
    INFEASIBLE_WITH_ALTERNATIVE = "infeasible_with_alternative"
    HEURISTIC = "heuristic"  # greedy methods make no optimality claim


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every solve method.

    ``residual_tests=False`` restricts the validity checks (and the reported
    diagnostics) to coefficient t-tests, the mode used when comparing against
    iterative re-solving.
    """

    significance: SignificanceConfig = SignificanceConfig()
    penalties: PenaltyParams = PenaltyParams()
    bigm_samples: int = 50
    bigm_safety: float = 2.0
    seed: int = 0
    time_limit: float = 600.0
    residual_tests: bool = True


@dataclass(frozen=True)
class SolveOutcome:
    """Everything a solve produced: winner, diagnostics, and search counters."""

    status: SolveStatus
    subset: Optional[tuple[int, ...]]
    fit: Optional[FitResult]
    diagnostics: Optional[DiagnosticsReport]
    alternative: Optional[AltCandidate]
    alternative_score: Optional[float]
    nodes_explored: int
    cuts_added: int
    cut_pool: frozenset[tuple[int, ...]]
    bound_context: Optional[BoundContext]
    wall_time: float


def check_candidate(
    dataset: Dataset,
    subset,
    cfg: SolverConfig,
    ctx: Optional[BoundContext],
    need_residuals: bool = True,
) -> tuple[str, FitResult, Optional[DiagnosticsReport]]:
    """Fit and test one complete candidate subset.

    Returns ``("feasible", fit, report)`` or ``("cut", fit, report)``.  A
    rank-deficient fit is cut with ``report=None`` (unusable).  When the
    pre-filter from the bound context already proves a t-test failure, the
    residual tests are run only if ``need_residuals`` asks for them (they are
    needed while the alternative slot is still being updated).
    """
    fit = linalg.ols_fit(dataset, subset)
    if not fit.full_rank:
        return "cut", fit, None
    if ctx is not None and not bounds.relaxed_ttest_filter(fit, ctx):
        # Some coefficient provably fails its exact t-test.
        report = diagnostics.run_diagnostics(
            dataset,
            fit,
            cfg.significance,
            residual_tests=cfg.residual_tests and need_residuals,
        )
        return "cut", fit, report
    report = diagnostics.run_diagnostics(
        dataset, fit, cfg.significance, residual_tests=cfg.residual_tests
    )
    verdict = "feasible" if report.feasible else "cut"
    return verdict, fit, report


def node_bound(dataset: Dataset, fixed_in, fixed_out) -> float:
    """SSE of the fit on every column the node could still select.

    This never exceeds the SSE of any pair-legal completion, because each
    completion uses a subset of these columns.
    """
    fixed_in = frozenset(fixed_in)
    fixed_out = frozenset(fixed_out)
    columns = sorted(fixed_in | set(_free_columns(dataset, fixed_in, fixed_out)))
    _, sse = linalg.subset_sse(dataset, columns)
    return sse


def _free_columns(dataset: Dataset, fixed_in, fixed_out) -> list[int]:
    return [
        j
        for j in range(2 * dataset.m)
        if j not in fixed_in
        and j not in fixed_out
        and dataset.pair(j) not in fixed_in
    ]


def _max_cardinality(dataset: Dataset, fixed_in, free: list[int]) -> int:
    """Largest pair-legal subset containing ``fixed_in`` and drawing from ``free``."""
    used_groups = {j % dataset.m for j in fixed_in}
    free_groups = {j % dataset.m for j in free} - used_groups
    return len(fixed_in) + len(free_groups)


@dataclass
class _Node:
    fixed_in: frozenset[int]
    fixed_out: frozenset[int]
    columns: tuple[int, ...]  # fixed_in plus free, sorted
    coefficients: np.ndarray  # bound-fit coefficients aligned with columns
    bound: float


class _Search:
    """One branch-and-bound run over a fixed dataset, k, and configuration."""

    def __init__(
        self,
        dataset: Dataset,
        k: int,
        cfg: SolverConfig,
        enforce: bool,
        alt_mode: Optional[str],
        excluded: frozenset[tuple[int, ...]],
    ):
        self.dataset = dataset
        self.k = k
        self.cfg = cfg
        self.enforce = enforce
        self.alt_mode = alt_mode
        self.excluded = excluded
        self.ctx: Optional[BoundContext] = None

        self.incumbent_sse = float("inf")
        self.incumbent: Optional[tuple[tuple[int, ...], FitResult, Optional[DiagnosticsReport]]] = None
        self.alternative: Optional[AltCandidate] = None
        self.cuts: set[tuple[int, ...]] = set()
        self.evaluated: set[tuple[int, ...]] = set()
        self.nodes_explored = 0

        self.heap: list[tuple[float, int, _Node]] = []
        self.tick = itertools.count()

    # -- candidate handling -------------------------------------------------

    def consider(self, subset) -> None:
        """Evaluate a complete candidate subset exactly once."""
        key = tuple(sorted(subset))
        if key in self.evaluated or key in self.excluded:
            return
        self.evaluated.add(key)

        if self.enforce:
            verdict, fit, report = check_candidate(
                self.dataset,
                key,
                self.cfg,
                self.ctx,
                need_residuals=self.incumbent is None,
            )
            if verdict == "cut":
                self.cuts.add(key)
                if self.incumbent is None and report is not None:
                    self._update_alternative(fit, report)
                return
        else:
            fit = linalg.ols_fit(self.dataset, key)
            report = None

        if self._improves(fit.sse, key):
            self.incumbent_sse = fit.sse
            self.incumbent = (key, fit, report)

    def _improves(self, sse: float, key: tuple[int, ...]) -> bool:
        if self.incumbent is None:
            return True
        if sse < self.incumbent_sse - SSE_TIE_EPS:
            return True
        if sse <= self.incumbent_sse + SSE_TIE_EPS and key < self.incumbent[0]:
            return True  # tie on SSE: prefer the lexicographically smaller subset
        return False

    def _update_alternative(self, fit: FitResult, report: DiagnosticsReport) -> None:
        candidate = AltCandidate.from_fit(fit, report)
        if self.alt_mode == "score":
            self.alternative = altsol.update_alternative_by_score(
                self.alternative, candidate, self.cfg.penalties, self.cfg.significance
            )
        else:
            self.alternative = altsol.update_alternative(
                self.alternative, candidate, self.cfg.penalties, self.cfg.significance
            )

    # -- tree handling -------------------------------------------------------

    def _make_node(self, fixed_in: frozenset, fixed_out: frozenset) -> Optional[_Node]:
        """Bound a node, harvest its heuristic candidate, or prune it."""
        free = _free_columns(self.dataset, fixed_in, fixed_out)
        if len(fixed_in) + len(free) < self.k:
            return None
        if _max_cardinality(self.dataset, fixed_in, free) < self.k:
            return None
        columns = tuple(sorted(set(fixed_in) | set(free)))
        coefficients, sse = linalg.subset_sse(self.dataset, columns)
        node = _Node(
            fixed_in=fixed_in,
            fixed_out=fixed_out,
            columns=columns,
            coefficients=coefficients,
            bound=sse,
        )
        self._heuristic_candidate(node)
        return node

    def _heuristic_candidate(self, node: _Node) -> None:
        """Top-coefficient completion of a node, pair-legalized greedily."""
        order = np.argsort(-np.abs(node.coefficients), kind="stable")
        chosen = list(node.fixed_in)
        groups = {j % self.dataset.m for j in chosen}
        for position in order:
            if len(chosen) == self.k:
                break
            column = node.columns[position]
            group = column % self.dataset.m
            if column in node.fixed_in or group in groups:
                continue
            chosen.append(column)
            groups.add(group)
        if len(chosen) == self.k:
            self.consider(chosen)

    def _push(self, node: Optional[_Node]) -> None:
        if node is not None:
            heapq.heappush(self.heap, (node.bound, next(self.tick), node))

    def _branch_column(self, node: _Node) -> int:
        free_mask = np.array([c not in node.fixed_in for c in node.columns])
        magnitudes = np.where(free_mask, np.abs(node.coefficients), -1.0)
        return node.columns[int(np.argmax(magnitudes))]

    def _expand(self, node: _Node) -> None:
        column = self._branch_column(node)
        include_in = node.fixed_in | {column}
        if len(include_in) == self.k:
            self.consider(tuple(include_in))
        else:
            self._push(self._make_node(include_in, node.fixed_out))
        self._push(self._make_node(node.fixed_in, node.fixed_out | {column}))

    # -- main loop ------------------------------------------------------------

    def run(self) -> SolveOutcome:
        start = time.monotonic()
        deadline = start + self.cfg.time_limit

        if not 1 <= self.k <= self.dataset.m:
            raise ConfigError(f"k={self.k} outside 1..{self.dataset.m}")
        if self.dataset.n < self.k + 2:
            raise DegreesOfFreedomError(
                f"need n >= k + 2, have n={self.dataset.n}, k={self.k}"
            )

        if self.enforce:
            self.ctx = bounds.build_bound_context(
                self.dataset,
                self.k,
                self.cfg.significance,
                num_samples=self.cfg.bigm_samples,
                safety=self.cfg.bigm_safety,
                seed=self.cfg.seed,
            )

        # The root is always bounded (and its heuristic candidate evaluated)
        # before the clock is consulted, so even a zero time limit yields
        # either an incumbent or an alternative.
        self._push(self._make_node(frozenset(), frozenset()))

        timed_out = False
        while self.heap:
            if time.monotonic() > deadline:
                timed_out = True
                break
            bound, _, node = heapq.heappop(self.heap)
            if self.incumbent is not None and bound >= self.incumbent_sse - SSE_TIE_EPS:
                break  # best-first: no open node can beat the incumbent
            self.nodes_explored += 1
            self._expand(node)

        wall_time = time.monotonic() - start
        exhausted = not timed_out

        if self.incumbent is not None:
            subset, fit, report = self.incumbent
            if report is None:  # attach diagnostics for reporting
                try:
                    report = diagnostics.run_diagnostics(
                        self.dataset,
                        fit,
                        self.cfg.significance,
                        residual_tests=self.cfg.residual_tests,
                    )
                except RankDeficientFitError:
                    report = None
            status = SolveStatus.OPTIMAL if exhausted else SolveStatus.BEST_FEASIBLE
            return self._outcome(status, subset, fit, report, wall_time)

        status = (
            SolveStatus.INFEASIBLE_WITH_ALTERNATIVE
            if exhausted
            else SolveStatus.ALTERNATIVE
        )
        return self._outcome(status, None, None, None, wall_time)

    def _outcome(self, status, subset, fit, report, wall_time) -> SolveOutcome:
        include_alt = subset is None and self.alternative is not None
        score = (
            altsol.penalty_score(
                self.alternative, self.cfg.penalties, self.cfg.significance
            )
            if include_alt
            else None
        )
        return SolveOutcome(
            status=status,
            subset=subset,
            fit=fit,
            diagnostics=report,
            alternative=self.alternative if include_alt else None,
            alternative_score=score,
            nodes_explored=self.nodes_explored,
            cuts_added=len(self.cuts),
            cut_pool=frozenset(self.cuts),
            bound_context=self.ctx,
            wall_time=wall_time,
        )


def solve_base(
    dataset: Dataset,
    k: int,
    cfg: SolverConfig | None = None,
    excluded: frozenset[tuple[int, ...]] = frozenset(),
) -> SolveOutcome:
    """Minimum-SSE pair-legal k-subset, with no statistical constraints.

    Diagnostics for the winner are attached for reporting only.  ``excluded``
    subsets are skipped entirely, which is how iterative re-solving feeds its
    accumulated cuts back in.
    """
    cfg = cfg or SolverConfig()
    return _Search(dataset, k, cfg, enforce=False, alt_mode=None, excluded=excluded).run()


def solve_lazy(dataset: Dataset, k: int, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Minimum-SSE k-subset among those passing every statistical test.

    Candidates failing a test are cut from the search; while no valid
    incumbent exists they feed the staged alternative comparison, so an
    infeasible instance still returns a principled near-feasible model.
    """
    cfg = cfg or SolverConfig()
    return _Search(
        dataset, k, cfg, enforce=True, alt_mode="staged", excluded=frozenset()
    ).run()


def solve_penalty(
    dataset: Dataset, k: int, cfg: SolverConfig | None = None
) -> SolveOutcome:
    """Like :func:`solve_lazy`, but the alternative slot is decided by the
    penalty score alone instead of the staged comparison."""
    cfg = cfg or SolverConfig()
    return _Search(
        dataset, k, cfg, enforce=True, alt_mode="score", excluded=frozenset()
    ).run()
