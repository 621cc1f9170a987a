"""Near-feasible alternative bookkeeping.

While the constrained search has not yet found a fully valid model, every
rejected candidate competes for a single "best alternative" slot.  The
comparison mimics how an analyst builds a model by hand: coefficient
significance is judged first (count of insignificant coefficients, then their
average p-value with a tolerance band), and only when those stages cannot
decide does a weighted penalty score over all quality measures settle it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .diagnostics import DiagnosticsReport, SignificanceConfig
from .linalg import FitResult


@dataclass(frozen=True)
class PenaltyParams:
    """Weights of the quality score and the tolerance of the staged decision."""

    mse_weight: float = 4.0
    insig_count_weight: float = 0.5
    insig_pvalue_weight: float = 6.0
    linearity_weight: float = 0.5
    hetero_weight: float = 0.5
    tolerance: float = 0.1

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        for name in (
            "mse_weight",
            "insig_count_weight",
            "insig_pvalue_weight",
            "linearity_weight",
            "hetero_weight",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class AltCandidate:
    """Quality summary of one rejected subset, as seen by the comparators."""

    subset: tuple[int, ...]
    mse: float
    n_insignificant: int
    insig_pvalue_mean: float
    linearity_pvalue: float
    hetero_pvalue: float

    @classmethod
    def from_fit(cls, fit: FitResult, report: DiagnosticsReport) -> "AltCandidate":
        return cls(
            subset=fit.subset,
            mse=fit.mse,
            n_insignificant=report.n_insignificant,
            insig_pvalue_mean=report.insig_pvalue_mean,
            linearity_pvalue=report.linearity_pvalue,
            hetero_pvalue=report.hetero_pvalue,
        )


def scaled_overshoot(p: float, alpha: float) -> float:
    """How far ``p`` exceeds the threshold ``1 - alpha``, rescaled to [0, 1].

    Used for coefficient p-values, which violate by being too large:
    ``max(p - (1 - alpha), 0) / alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    return min(max(p - (1.0 - alpha), 0.0) / alpha, 1.0)


def scaled_shortfall(p: float, alpha: float) -> float:
    """How far ``p`` falls below the threshold ``1 - alpha``, rescaled to [0, 1].

    Used for residual-test p-values, which violate by being too small:
    ``max((1 - alpha) - p, 0) / (1 - alpha)``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    return min(max((1.0 - alpha) - p, 0.0) / (1.0 - alpha), 1.0)


def penalty_score(
    cand: AltCandidate, params: PenaltyParams, cfg: SignificanceConfig
) -> float:
    """Weighted penalty of a candidate; lower is better.

    Violation terms enter through the rescaled transforms so that p-values
    measured against thresholds of different widths contribute comparably,
    and a test inside its threshold contributes nothing.
    """
    return (
        params.mse_weight * cand.mse
        + params.insig_count_weight * cand.n_insignificant
        + params.insig_pvalue_weight
        * scaled_overshoot(cand.insig_pvalue_mean, cfg.coef_confidence)
        + params.linearity_weight
        * scaled_shortfall(cand.linearity_pvalue, cfg.linearity_confidence)
        + params.hetero_weight
        * scaled_shortfall(cand.hetero_pvalue, cfg.hetero_confidence)
    )


def better_by_score(
    incumbent: AltCandidate,
    challenger: AltCandidate,
    params: PenaltyParams,
    cfg: SignificanceConfig,
) -> AltCandidate:
    """Penalty-score comparison; ties keep the incumbent."""
    if penalty_score(challenger, params, cfg) < penalty_score(incumbent, params, cfg):
        return challenger
    return incumbent


def better_with_tolerance(
    incumbent: AltCandidate,
    challenger: AltCandidate,
    params: PenaltyParams,
    cfg: SignificanceConfig,
) -> AltCandidate:
    """Staged comparison for two candidates that both have insignificant coefficients.

    A challenger whose average violating p-value exceeds the incumbent's by
    more than the tolerance is dismissed outright.  Otherwise strict dominance
    in both the average and the count decides, and a conflict between the two
    measures falls through to the penalty score.
    """
    gap = challenger.insig_pvalue_mean - incumbent.insig_pvalue_mean
    if gap > params.tolerance:
        return incumbent
    if (
        incumbent.insig_pvalue_mean > challenger.insig_pvalue_mean
        and incumbent.n_insignificant > challenger.n_insignificant
    ):
        return challenger
    if (
        incumbent.insig_pvalue_mean < challenger.insig_pvalue_mean
        and incumbent.n_insignificant < challenger.n_insignificant
    ):
        return incumbent
    return better_by_score(incumbent, challenger, params, cfg)


def update_alternative(
    incumbent: Optional[AltCandidate],
    challenger: AltCandidate,
    params: PenaltyParams,
    cfg: SignificanceConfig,
) -> AltCandidate:
    """Fold one rejected candidate into the single-slot alternative state.

    Significance is judged first: a candidate with no insignificant
    coefficients beats any candidate with some.  When both sides are clean
    the penalty score decides; when both are dirty the tolerance stage does.
    """
    if incumbent is None:
        return challenger
    inc_dirty = incumbent.n_insignificant > 0
    new_dirty = challenger.n_insignificant > 0
    if inc_dirty and not new_dirty:
        return challenger
    if not inc_dirty and new_dirty:
        return incumbent
    if not inc_dirty and not new_dirty:
        return better_by_score(incumbent, challenger, params, cfg)
    return better_with_tolerance(incumbent, challenger, params, cfg)


def update_alternative_by_score(
    incumbent: Optional[AltCandidate],
    challenger: AltCandidate,
    params: PenaltyParams,
    cfg: SignificanceConfig,
) -> AltCandidate:
    """Simple-penalty variant of the fold: the score alone decides."""
    if incumbent is None:
        return challenger
    return better_by_score(incumbent, challenger, params, cfg)
