"""Run orchestration: method dispatch, sweeps over k, and report files.

Every (k, method) run writes three artifacts into the output directory:

* ``outcome_<method>_k<k>.json`` -- the full machine-readable report
  (schema ``regsel-report/1``),
* ``residuals_<method>_k<k>.csv`` -- fitted/residual/|residual| rows for the
  reported model,
* one row appended to ``comparison.csv``.

Reports are reproducible byte for byte across runs with the same
configuration and seed, except for the wall-time fields.
"""

from __future__ import annotations

import dataclasses
import importlib.resources
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import baselines, diagnostics, linalg, metrics, solver
from .altsol import PenaltyParams
from .baselines import IterTrace
from .data import Dataset, load_table, preprocess
from .diagnostics import RankDeficientFitError, SignificanceConfig
from .linalg import FitResult
from .metrics import ComparisonRow
from .solver import SolveOutcome, SolveStatus, SolverConfig

REPORT_SCHEMA = "regsel-report/1"


def report_schema() -> dict:
    """The published JSON Schema that every outcome report validates against."""
    text = (
        importlib.resources.files("regsel")
        .joinpath("report_schema.json")
        .read_text(encoding="utf-8")
    )
    return json.loads(text)


METHODS = ("lazy", "base", "fs", "iter", "penalty")

COMPARISON_HEADER = (
    "dataset,k,method,status,adjusted_r2,rep,n_insignificant,"
    "insig_pvalue_mean,linearity_pvalue,hetero_pvalue,wall_time"
)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command-line invocation."""

    input_path: str
    response: str
    method: str = "lazy"
    k_values: tuple[int, ...] = (3,)
    delimiter: str = ","
    coef_confidence: float = 0.95
    linearity_confidence: float = 0.99
    hetero_confidence: float = 0.99
    mse_weight: float = 4.0
    insig_count_weight: float = 0.5
    insig_pvalue_weight: float = 6.0
    linearity_weight: float = 0.5
    hetero_weight: float = 0.5
    tolerance: float = 0.1
    bigm_samples: int = 50
    bigm_safety: float = 2.0
    seed: int = 0
    time_limit: float = 600.0
    threads: int = 1
    out_dir: str = "."

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            significance=SignificanceConfig(
                coef_confidence=self.coef_confidence,
                linearity_confidence=self.linearity_confidence,
                hetero_confidence=self.hetero_confidence,
            ),
            penalties=PenaltyParams(
                mse_weight=self.mse_weight,
                insig_count_weight=self.insig_count_weight,
                insig_pvalue_weight=self.insig_pvalue_weight,
                linearity_weight=self.linearity_weight,
                hetero_weight=self.hetero_weight,
                tolerance=self.tolerance,
            ),
            bigm_samples=self.bigm_samples,
            bigm_safety=self.bigm_safety,
            seed=self.seed,
            time_limit=self.time_limit,
        )


def run_method(
    dataset: Dataset, k: int, method: str, cfg: SolverConfig
) -> tuple[SolveOutcome, Optional[IterTrace]]:
    """Dispatch one solve; forward selection is wrapped as an outcome."""
    if method == "base":
        return solver.solve_base(dataset, k, cfg), None
    if method == "lazy":
        return solver.solve_lazy(dataset, k, cfg), None
    if method == "penalty":
        return solver.solve_penalty(dataset, k, cfg), None
    if method == "iter":
        return baselines.solve_iterative(dataset, k, cfg)
    if method == "fs":
        start = time.monotonic()
        subset = baselines.forward_select(dataset, k)
        fit = linalg.ols_fit(dataset, subset)
        try:
            report = diagnostics.run_diagnostics(dataset, fit, cfg.significance)
        except RankDeficientFitError:
            report = None
        outcome = SolveOutcome(
            status=SolveStatus.HEURISTIC,
            subset=subset,
            fit=fit,
            diagnostics=report,
            alternative=None,
            alternative_score=None,
            nodes_explored=0,
            cuts_added=0,
            cut_pool=frozenset(),
            bound_context=None,
            wall_time=time.monotonic() - start,
        )
        return outcome, None
    raise solver.ConfigError(f"unknown method {method!r}; expected one of {METHODS}")


def _fit_block(dataset: Dataset, fit: FitResult) -> dict:
    return {
        "indices": list(fit.subset),
        "names": [dataset.names[j] for j in fit.subset],
        "coefficients": [float(c) for c in fit.coefficients],
        "std_errors": (
            [float(s) for s in fit.std_errors] if fit.std_errors is not None else None
        ),
        "sse": fit.sse,
        "mse": fit.mse,
        "adjusted_r2": linalg.adjusted_r2(fit.sse, fit.n, fit.k),
    }


def _diagnostics_block(report) -> Optional[dict]:
    if report is None:
        return None
    return {
        "coef_pvalues": [float(p) for p in report.coef_pvalues],
        "n_insignificant": report.n_insignificant,
        "insig_pvalue_mean": report.insig_pvalue_mean,
        "linearity_pvalue": report.linearity_pvalue,
        "absres_pvalue": report.absres_pvalue,
        "bp_pvalue": report.bp_pvalue,
        "hetero_pvalue": report.hetero_pvalue,
        "ttests_ok": report.ttests_ok,
        "linearity_ok": report.linearity_ok,
        "hetero_ok": report.hetero_ok,
        "feasible": report.feasible,
    }


def build_report(
    config: RunConfig,
    dataset: Dataset,
    k: int,
    method: str,
    outcome: SolveOutcome,
    trace: Optional[IterTrace] = None,
    base_outcome: Optional[SolveOutcome] = None,
) -> dict:
    """Assemble the outcome JSON document (schema ``regsel-report/1``)."""
    params = dataclasses.asdict(config)
    params.pop("out_dir")
    report: dict = {
        "schema": REPORT_SCHEMA,
        "dataset": {
            "id": Path(config.input_path).stem,
            "path": config.input_path,
            "n": dataset.n,
            "m": dataset.m,
            "response": config.response,
        },
        "method": method,
        "k": k,
        "params": params,
        "status": outcome.status.value,
        "solution": _fit_block(dataset, outcome.fit) if outcome.fit is not None else None,
        "diagnostics": _diagnostics_block(outcome.diagnostics),
        "alternative": None,
        "search": {
            "nodes_explored": outcome.nodes_explored,
            "cuts_added": outcome.cuts_added,
            "relaxation_converged": (
                outcome.bound_context.relaxation_converged
                if outcome.bound_context is not None
                else None
            ),
        },
        "rep": (
            metrics.rep(outcome, base_outcome, dataset)
            if base_outcome is not None
            else (1.0 if method == "base" else None)
        ),
        "wall_time": outcome.wall_time,
    }
    if outcome.alternative is not None:
        alt = outcome.alternative
        report["alternative"] = {
            "indices": list(alt.subset),
            "names": [dataset.names[j] for j in alt.subset],
            "mse": alt.mse,
            "n_insignificant": alt.n_insignificant,
            "insig_pvalue_mean": alt.insig_pvalue_mean,
            "linearity_pvalue": alt.linearity_pvalue,
            "hetero_pvalue": alt.hetero_pvalue,
            "penalty_score": outcome.alternative_score,
        }
    if trace is not None:
        report["iterations"] = [
            {
                "subset": list(record.subset),
                "cut_added": record.cut_added,
                "n_insignificant": (
                    record.diagnostics.n_insignificant
                    if record.diagnostics is not None
                    else None
                ),
            }
            for record in trace.iterations
        ]
        report["solver_calls"] = trace.solver_calls
    return report


def _comparison_row(
    config: RunConfig,
    dataset: Dataset,
    k: int,
    method: str,
    outcome: SolveOutcome,
    base_outcome: Optional[SolveOutcome],
) -> ComparisonRow:
    fit = metrics.reporting_fit(dataset, outcome)
    adjusted = metrics.outcome_adjusted_r2(dataset, outcome)
    if method == "base":
        rep_value = 1.0 if adjusted is not None else None
    elif base_outcome is not None:
        rep_value = metrics.rep(outcome, base_outcome, dataset)
    else:
        rep_value = None
    report = outcome.diagnostics
    alt = outcome.alternative
    if report is not None:
        stats = (
            report.n_insignificant,
            report.insig_pvalue_mean,
            report.linearity_pvalue,
            report.hetero_pvalue,
        )
    elif alt is not None:
        stats = (
            alt.n_insignificant,
            alt.insig_pvalue_mean,
            alt.linearity_pvalue,
            alt.hetero_pvalue,
        )
    else:
        stats = (None, None, None, None)
    return ComparisonRow(
        dataset_id=Path(config.input_path).stem,
        k=k,
        method=method,
        status=outcome.status.value,
        adjusted_r2=adjusted,
        rep=rep_value,
        n_insignificant=stats[0],
        insig_pvalue_mean=stats[1],
        linearity_pvalue=stats[2],
        hetero_pvalue=stats[3],
        wall_time=outcome.wall_time,
    )


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # native repr round-trips to full precision
    return str(value)


def _append_comparison_row(path: Path, row: ComparisonRow) -> None:
    line = ",".join(
        _format_cell(value)
        for value in (
            row.dataset_id,
            row.k,
            row.method,
            row.status,
            row.adjusted_r2,
            row.rep,
            row.n_insignificant,
            row.insig_pvalue_mean,
            row.linearity_pvalue,
            row.hetero_pvalue,
            row.wall_time,
        )
    )
    is_new = not path.exists()
    with open(path, "a", encoding="utf-8") as handle:
        if is_new:
            handle.write(COMPARISON_HEADER + "\n")
        handle.write(line + "\n")


def _write_residuals(path: Path, fit: FitResult) -> None:
    rows = metrics.residual_plot_data(fit)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("fitted,residual,abs_residual\n")
        for fitted, residual, absres in rows:
            handle.write(
                f"{float(fitted)!r},{float(residual)!r},{float(absres)!r}\n"
            )


def _print_summary(dataset: Dataset, k: int, method: str, outcome: SolveOutcome) -> None:
    if outcome.fit is not None:
        names = ", ".join(dataset.names[j] for j in outcome.fit.subset)
        r2 = linalg.adjusted_r2(outcome.fit.sse, outcome.fit.n, outcome.fit.k)
        print(
            f"[{method} k={k}] {outcome.status.value}: {names} "
            f"(adjusted R^2 {r2:.4f})"
        )
    elif outcome.alternative is not None:
        alt = outcome.alternative
        names = ", ".join(dataset.names[j] for j in alt.subset)
        print(
            f"[{method} k={k}] {outcome.status.value}: alternative {names} "
            f"({alt.n_insignificant} insignificant, "
            f"mean violating p {alt.insig_pvalue_mean:.4f})"
        )
    else:
        print(f"[{method} k={k}] {outcome.status.value}: no model")


def run(config: RunConfig) -> int:
    """Execute the configured sweep and write all artifacts.

    Returns the process exit status: 0 on success, 2 when any run ended
    infeasible (its alternative is still written), 1 is reserved for errors
    raised to the command-line wrapper.
    """
    if config.method not in METHODS:
        raise solver.ConfigError(
            f"unknown method {config.method!r}; expected one of {METHODS}"
        )
    if config.threads < 1:
        raise solver.ConfigError("threads must be >= 1")
    if not config.k_values:
        raise solver.ConfigError("no k values requested")

    table = load_table(config.input_path, delimiter=config.delimiter)
    dataset = preprocess(table, config.response)
    solver_cfg = config.solver_config()

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    comparison_path = out_dir / "comparison.csv"

    any_infeasible = False
    for k in config.k_values:
        outcome, trace = run_method(dataset, k, config.method, solver_cfg)
        base_outcome = (
            solver.solve_base(dataset, k, solver_cfg)
            if config.method != "base"
            else None
        )
        _print_summary(dataset, k, config.method, outcome)
        report = build_report(
            config, dataset, k, config.method, outcome, trace, base_outcome
        )
        report_path = out_dir / f"outcome_{config.method}_k{k}.json"
        with open(report_path, "w", encoding="utf-8") as handle:
            json.dump(report, handle, indent=2)
            handle.write("\n")

        fit = metrics.reporting_fit(dataset, outcome)
        if fit is not None:
            _write_residuals(out_dir / f"residuals_{config.method}_k{k}.csv", fit)

        _append_comparison_row(
            comparison_path,
            _comparison_row(config, dataset, k, config.method, outcome, base_outcome),
        )
        if outcome.status == SolveStatus.INFEASIBLE_WITH_ALTERNATIVE:
            any_infeasible = True

    return 2 if any_infeasible else 0
