"""Command-line front end.

Example::

    regsel --input housing.csv --response medv --method lazy --k 3:6 \
        --seed 7 --out results/

Options may also come from a key-value config file (``--config run.cfg``,
lines like ``alpha-e = 0.95``); explicit flags win over file values.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import TableError
from .driver import METHODS, RunConfig, run
from .linalg import DegreesOfFreedomError
from .solver import ConfigError


def parse_k_values(text: str) -> tuple[int, ...]:
    """Parse ``--k``: a single integer or an inclusive range ``a:b``."""
    text = text.strip()
    if ":" in text:
        low_text, high_text = text.split(":", 1)
        low, high = int(low_text), int(high_text)
        if high < low:
            raise ValueError(f"empty k range {text!r}")
        return tuple(range(low, high + 1))
    return (int(text),)


# flag name -> RunConfig field
_CONFIG_KEYS = {
    "input": "input_path",
    "response": "response",
    "method": "method",
    "k": "k_values",
    "delimiter": "delimiter",
    "alpha-e": "coef_confidence",
    "alpha-l": "linearity_confidence",
    "alpha-h": "hetero_confidence",
    "lambda-mse": "mse_weight",
    "lambda-pi": "insig_count_weight",
    "lambda-e": "insig_pvalue_weight",
    "lambda-l": "linearity_weight",
    "lambda-h": "hetero_weight",
    "tau": "tolerance",
    "bigm-samples": "bigm_samples",
    "bigm-safety": "bigm_safety",
    "seed": "seed",
    "time-limit": "time_limit",
    "threads": "threads",
    "out": "out_dir",
}

_INT_FIELDS = {"bigm_samples", "seed", "threads"}
_FLOAT_FIELDS = {
    "coef_confidence",
    "linearity_confidence",
    "hetero_confidence",
    "mse_weight",
    "insig_count_weight",
    "insig_pvalue_weight",
    "linearity_weight",
    "hetero_weight",
    "tolerance",
    "bigm_safety",
    "time_limit",
}


def read_config_file(path: str) -> dict:
    """Parse a ``key = value`` config file into RunConfig field values."""
    values: dict = {}
    for line_number, raw_line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip().replace("_", "-")
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{line_number}: unknown key {key!r}")
        field = _CONFIG_KEYS[key]
        if field == "k_values":
            values[field] = parse_k_values(value)
        elif field in _INT_FIELDS:
            values[field] = int(value)
        elif field in _FLOAT_FIELDS:
            values[field] = float(value)
        else:
            values[field] = value
    return values


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1, not argparse's default 2 (2 means
    # "infeasible instance" for this tool)
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="regsel",
        description=(
            "Select the best k-variable linear regression subset by exact "
            "branch-and-bound, enforcing coefficient significance and "
            "residual diagnostics."
        ),
    )
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--input", help="input delimiter-separated file")
    parser.add_argument("--response", help="name of the response column")
    parser.add_argument(
        "--method", choices=METHODS, help="solve method (default: lazy)"
    )
    parser.add_argument(
        "--k", help="subset size, a single integer or an inclusive range a:b"
    )
    parser.add_argument("--delimiter", help="cell separator (default: ',')")
    parser.add_argument(
        "--alpha-e", type=float, help="confidence level for coefficient t-tests"
    )
    parser.add_argument(
        "--alpha-l", type=float, help="confidence level for the linearity test"
    )
    parser.add_argument(
        "--alpha-h", type=float, help="confidence level for heteroscedasticity tests"
    )
    parser.add_argument("--lambda-mse", type=float, help="penalty weight on MSE")
    parser.add_argument(
        "--lambda-pi", type=float, help="penalty weight on the insignificant count"
    )
    parser.add_argument(
        "--lambda-e", type=float, help="penalty weight on the mean violating p-value"
    )
    parser.add_argument(
        "--lambda-l", type=float, help="penalty weight on the linearity violation"
    )
    parser.add_argument(
        "--lambda-h", type=float, help="penalty weight on the heteroscedasticity violation"
    )
    parser.add_argument(
        "--tau", type=float, help="tolerance of the staged alternative comparison"
    )
    parser.add_argument(
        "--bigm-samples", type=int, help="random subsets sampled to estimate big-M"
    )
    parser.add_argument("--bigm-safety", type=float, help="big-M safety factor")
    parser.add_argument("--seed", type=int, help="seed for big-M sampling")
    parser.add_argument(
        "--time-limit", type=float, help="wall-clock budget per solve, in seconds"
    )
    parser.add_argument("--threads", type=int, help="worker threads (currently 1)")
    parser.add_argument("--out", help="output directory for report artifacts")
    return parser


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))

    flag_fields = {
        "input": "input_path",
        "response": "response",
        "method": "method",
        "delimiter": "delimiter",
        "alpha_e": "coef_confidence",
        "alpha_l": "linearity_confidence",
        "alpha_h": "hetero_confidence",
        "lambda_mse": "mse_weight",
        "lambda_pi": "insig_count_weight",
        "lambda_e": "insig_pvalue_weight",
        "lambda_l": "linearity_weight",
        "lambda_h": "hetero_weight",
        "tau": "tolerance",
        "bigm_samples": "bigm_samples",
        "bigm_safety": "bigm_safety",
        "seed": "seed",
        "time_limit": "time_limit",
        "threads": "threads",
        "out": "out_dir",
    }
    for flag, field in flag_fields.items():
        value = getattr(args, flag)
        if value is not None:
            values[field] = value
    if args.k is not None:
        values["k_values"] = parse_k_values(args.k)

    if "input_path" not in values:
        raise ConfigError("--input is required (flag or config file)")
    if "response" not in values:
        raise ConfigError("--response is required (flag or config file)")
    return RunConfig(**values)


def main(argv=None) -> int:
    try:
        config = resolve_config(argv)
        if config.threads > 1:
            print(
                "note: parallel evaluation is not implemented; running single-threaded",
                file=sys.stderr,
            )
        return run(config)
    except (ConfigError, TableError, DegreesOfFreedomError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
