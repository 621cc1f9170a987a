"""Statistical validity tests for fitted subsets.

Three families of checks are run on every candidate model: two-sided t-tests
on the coefficients, a residual-versus-fitted linearity test, and a pair of
heteroscedasticity tests (absolute-residual slope and Breusch-Pagan).  The
heteroscedasticity verdict is deliberately lenient: it only counts as a
violation when *both* tests reject.

All confidence levels are expressed as confidences (0.95 means a 5% test);
a coefficient p-value violates at level ``alpha`` exactly when it exceeds
``1 - alpha``, while the residual tests violate when their p-value falls
below ``1 - alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .data import Dataset
from .linalg import FitResult

#: Fitted values with a standard deviation this far below the response scale
#: are treated as constant, which skips the slope-based residual tests.
_DEGENERATE_SPREAD = 1e-12

#: Residual spread below this fraction of the regressor spread marks a
#: numerically exact fit; such residuals are rounding noise, not data.
_DEGENERATE_RESIDUALS = 1e-10


class DiagnosticsError(ValueError):
    """Raised when a statistical test cannot be carried out."""


class RankDeficientFitError(DiagnosticsError):
    """Raised when coefficient tests are requested for a rank-deficient fit."""


def student_t_two_sided_pvalue(t: float, dof: int) -> float:
    """P(|T| >= |t|) for a Student's t variable with ``dof`` degrees of freedom.

    Evaluated through the regularized incomplete beta function:
    ``I_x(dof/2, 1/2)`` at ``x = dof / (dof + t^2)``.
    """
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    if math.isnan(t):
        raise ValueError("t statistic is NaN")
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return float(special.betainc(dof / 2.0, 0.5, x))


def student_t_two_sided_critical(pvalue: float, dof: int) -> float:
    """The |t| whose two-sided tail probability equals ``pvalue``.

    Inverse of :func:`student_t_two_sided_pvalue` in its first argument.
    """
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    if not 0.0 < pvalue <= 1.0:
        raise ValueError(f"pvalue must be in (0, 1], got {pvalue}")
    x = float(special.betaincinv(dof / 2.0, 0.5, pvalue))
    if x <= 0.0:
        return float("inf")
    return math.sqrt(dof * (1.0 - x) / x)


def chi_square_sf(x: float, dof: int) -> float:
    """Upper-tail probability P(X >= x) of a chi-square with ``dof`` df.

    Evaluated through the regularized upper incomplete gamma function
    ``Q(dof/2, x/2)``.
    """
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    if x < 0:
        raise ValueError(f"chi-square statistic must be >= 0, got {x}")
    return float(special.gammaincc(dof / 2.0, x / 2.0))


@dataclass(frozen=True)
class SignificanceConfig:
    """Confidence levels for the three test families."""

    coef_confidence: float = 0.95
    linearity_confidence: float = 0.99
    hetero_confidence: float = 0.99

    def __post_init__(self):
        for name in ("coef_confidence", "linearity_confidence", "hetero_confidence"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie strictly inside (0, 1)")


def insignificance_summary(
    pvalues: np.ndarray, confidence: float
) -> tuple[int, float]:
    """Count of coefficient p-values exceeding ``1 - confidence`` and their mean.

    The mean is 0 when every coefficient is significant.
    """
    threshold = 1.0 - confidence
    violating = pvalues[pvalues > threshold]
    if violating.size == 0:
        return 0, 0.0
    return int(violating.size), float(violating.mean())


def coef_t_tests(
    fit: FitResult, cfg: SignificanceConfig
) -> tuple[np.ndarray, int, float]:
    """Two-sided p-values for each coefficient, with the insignificance summary.

    Raises
    ------
    RankDeficientFitError
        When the fit carries no standard errors; such a model cannot be
        tested and is treated as failing by the solver.
    """
    if fit.std_errors is None:
        raise RankDeficientFitError(
            f"subset {fit.subset} is rank-deficient; coefficient tests undefined"
        )
    pvalues = np.empty(fit.k)
    for idx in range(fit.k):
        se = fit.std_errors[idx]
        coef = fit.coefficients[idx]
        if se == 0.0:
            pvalues[idx] = 1.0 if coef == 0.0 else 0.0
        else:
            pvalues[idx] = student_t_two_sided_pvalue(coef / se, fit.dof)
    count, mean = insignificance_summary(pvalues, cfg.coef_confidence)
    return pvalues, count, mean


@dataclass(frozen=True)
class SlopeTest:
    """Result of a univariate regression-with-intercept slope test."""

    slope: float
    stderr: float
    tvalue: float
    pvalue: float


def slope_test(x: np.ndarray, y: np.ndarray) -> SlopeTest:
    """t-test of the slope in the auxiliary regression ``y ~ 1 + x``.

    The test is skipped (p-value 1) in two degenerate situations: when ``x``
    has numerically no spread, since a constant regressor cannot exhibit a
    trend, and when the spread of ``y`` sits at rounding level relative to
    ``x``, as happens with the residuals of a numerically exact fit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 3:
        raise DiagnosticsError(f"slope test needs at least 3 points, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if math.sqrt(sxx) <= _DEGENERATE_SPREAD * max(1.0, math.sqrt(syy)):
        return SlopeTest(slope=0.0, stderr=0.0, tvalue=0.0, pvalue=1.0)
    if math.sqrt(syy) <= _DEGENERATE_RESIDUALS * max(1.0, math.sqrt(sxx)):
        return SlopeTest(slope=0.0, stderr=0.0, tvalue=0.0, pvalue=1.0)
    slope = float(xc @ yc) / sxx
    dof = n - 2
    sse = max(syy - slope * slope * sxx, 0.0)
    stderr = math.sqrt(sse / dof / sxx)
    if stderr == 0.0:
        if slope == 0.0:
            return SlopeTest(slope=0.0, stderr=0.0, tvalue=0.0, pvalue=1.0)
        return SlopeTest(slope=slope, stderr=0.0, tvalue=float("inf"), pvalue=0.0)
    tvalue = slope / stderr
    return SlopeTest(
        slope=slope,
        stderr=stderr,
        tvalue=tvalue,
        pvalue=student_t_two_sided_pvalue(tvalue, dof),
    )


def linearity_test(fit: FitResult) -> float:
    """p-value of the slope when regressing residuals on fitted values."""
    return slope_test(fit.fitted, fit.residuals).pvalue


def abs_residual_test(fit: FitResult) -> float:
    """p-value of the slope when regressing |residuals| on fitted values.

    A small p-value indicates that the residual spread trends with the fitted
    values, one of the two heteroscedasticity signals.
    """
    return slope_test(fit.fitted, np.abs(fit.residuals)).pvalue


def breusch_pagan_test(dataset: Dataset, fit: FitResult) -> float:
    """Breusch-Pagan heteroscedasticity p-value for a fitted subset.

    Squared residuals are regressed on the selected columns plus an
    intercept; the statistic ``n * R^2`` of that auxiliary regression is
    referred to a chi-square with ``k`` degrees of freedom.
    """
    e2 = fit.residuals**2
    centered = e2 - e2.mean()
    total = float(centered @ centered)
    scale = float(np.abs(e2).max(initial=0.0))
    if total <= (_DEGENERATE_SPREAD * max(1.0, scale)) ** 2 * fit.n:
        return 1.0  # residual magnitudes are constant
    Z = np.column_stack([np.ones(fit.n), dataset.design[:, list(fit.subset)]])
    coef, *_ = np.linalg.lstsq(Z, e2, rcond=None)
    resid = e2 - Z @ coef
    r_squared = 1.0 - float(resid @ resid) / total
    r_squared = min(max(r_squared, 0.0), 1.0)
    return chi_square_sf(fit.n * r_squared, fit.k)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Aggregated verdicts of all statistical tests for one fitted subset.

    ``hetero_pvalue`` is the larger of the two component p-values; a
    heteroscedasticity violation requires both components to reject.
    ``feasible`` is the conjunction of the three verdicts.
    """

    coef_pvalues: np.ndarray
    n_insignificant: int
    insig_pvalue_mean: float
    linearity_pvalue: float
    absres_pvalue: float
    bp_pvalue: float
    hetero_pvalue: float
    ttests_ok: bool
    linearity_ok: bool
    hetero_ok: bool
    feasible: bool


def assemble_report(
    coef_pvalues: np.ndarray,
    linearity_pvalue: float,
    absres_pvalue: float,
    bp_pvalue: float,
    cfg: SignificanceConfig,
) -> DiagnosticsReport:
    """Combine raw test p-values into a :class:`DiagnosticsReport`."""
    coef_pvalues = np.asarray(coef_pvalues, dtype=float)
    count, mean = insignificance_summary(coef_pvalues, cfg.coef_confidence)
    ttests_ok = count == 0
    linearity_ok = not (linearity_pvalue < 1.0 - cfg.linearity_confidence)
    hetero_threshold = 1.0 - cfg.hetero_confidence
    hetero_ok = not (
        absres_pvalue < hetero_threshold and bp_pvalue < hetero_threshold
    )
    return DiagnosticsReport(
        coef_pvalues=coef_pvalues,
        n_insignificant=count,
        insig_pvalue_mean=mean,
        linearity_pvalue=linearity_pvalue,
        absres_pvalue=absres_pvalue,
        bp_pvalue=bp_pvalue,
        hetero_pvalue=max(absres_pvalue, bp_pvalue),
        ttests_ok=ttests_ok,
        linearity_ok=linearity_ok,
        hetero_ok=hetero_ok,
        feasible=ttests_ok and linearity_ok and hetero_ok,
    )


def run_diagnostics(
    dataset: Dataset,
    fit: FitResult,
    cfg: SignificanceConfig,
    residual_tests: bool = True,
) -> DiagnosticsReport:
    """Run the full test battery on a fitted subset.

    With ``residual_tests=False`` only the coefficient t-tests are computed;
    the residual tests are recorded as untested (p-value 1, passing), which is
    how the t-test-only comparison mode is realized.

    Raises
    ------
    RankDeficientFitError
        For fits without standard errors; the caller decides whether that
        aborts the run or just disqualifies the candidate.
    """
    pvalues, _, _ = coef_t_tests(fit, cfg)
    if residual_tests:
        r_l = linearity_test(fit)
        p_abs = abs_residual_test(fit)
        p_bp = breusch_pagan_test(dataset, fit)
    else:
        r_l = p_abs = p_bp = 1.0
    return assemble_report(pvalues, r_l, p_abs, p_bp, cfg)
