"""Tabular ingestion and construction of the standardized, log-augmented design.

The design matrix produced here holds every explanatory column twice: columns
``0..m-1`` are the originals and columns ``m..2m-1`` their log transforms, with
column ``j`` paired with column ``j + m``.  All columns, including the
response, are standardized to mean 0 and sample standard deviation 1
(divisor ``n - 1``), so downstream regressions carry no intercept.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

import numpy as np

#: Cell contents treated as missing, matched case-insensitively.
MISSING_TOKENS = frozenset({"", "na", "nan", "?"})

LOG_SHIFT_POLICIES = ("shift", "strict")


class TableError(ValueError):
    """Raised for malformed or statistically unusable input tables."""


@dataclass(frozen=True)
class RawTable:
    """Parsed delimiter-separated table, prior to any cleaning.

    Each cell is a ``float``, a category label (``str``), or ``None`` for a
    missing value.  Row order is preserved exactly as read.
    """

    column_names: tuple[str, ...]
    cells: tuple[tuple[object, ...], ...]

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_columns(self) -> int:
        return len(self.column_names)


def _parse_cell(text: str):
    stripped = text.strip()
    if stripped.lower() in MISSING_TOKENS:
        return None
    try:
        return float(stripped)
    except ValueError:
        return stripped


def load_table(source: str | Path | IO, delimiter: str = ",") -> RawTable:
    """Read a delimiter-separated table with a header row.

    Parameters
    ----------
    source : path or readable file object
        UTF-8 text.  The first row is the header.
    delimiter : str
        Cell separator, comma by default.

    Raises
    ------
    TableError
        If a row has the wrong number of cells (the 1-based data row index is
        named), or the table has no data rows.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_table(handle, delimiter=delimiter)
    if isinstance(source, (bytes, bytearray)):
        return load_table(io.StringIO(source.decode("utf-8")), delimiter=delimiter)

    reader = csv.reader(source, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise TableError("empty input: no header row") from None
    names = tuple(name.strip() for name in header)
    if len(set(names)) != len(names):
        raise TableError("duplicate column names in header")

    rows = []
    for index, row in enumerate(reader, start=1):
        if not row:
            continue  # ignore blank lines
        if len(row) != len(names):
            raise TableError(
                f"row {index}: expected {len(names)} cells, found {len(row)}"
            )
        rows.append(tuple(_parse_cell(cell) for cell in row))
    if not rows:
        raise TableError("empty input: no data rows")
    return RawTable(column_names=names, cells=tuple(rows))


@dataclass(frozen=True)
class Dataset:
    """Standardized regression data with original/log column pairing.

    Attributes
    ----------
    n, m : int
        Observation count and number of explanatory columns before log
        augmentation.  The design has ``2 * m`` columns.
    design : ndarray of shape (n, 2m)
        Standardized explanatory columns; column ``j`` pairs with ``j + m``.
    response : ndarray of shape (n,)
        Standardized response.
    column_means, column_stds : ndarray of shape (2m + 1,)
        Pre-standardization moments for the design columns followed by the
        response; needed to map new data or predictions back.
    names : tuple of 2m + 1 labels
        Design column labels followed by the response label.
    log_shifts : ndarray of shape (m,)
        Additive shift applied inside each log transform (0 when the source
        column was strictly positive).
    """

    n: int
    m: int
    design: np.ndarray
    response: np.ndarray
    column_means: np.ndarray
    column_stds: np.ndarray
    names: tuple[str, ...]
    log_shifts: np.ndarray

    def pair(self, j: int) -> int:
        """Index of the column paired with ``j`` (an involution)."""
        return j + self.m if j < self.m else j - self.m

    def columns(self, subset: Sequence[int]) -> np.ndarray:
        return self.design[:, list(subset)]

    def is_pair_legal(self, subset: Sequence[int]) -> bool:
        chosen = set(subset)
        return all(self.pair(j) not in chosen for j in chosen)


def _log_columns(X: np.ndarray, policy: str) -> tuple[np.ndarray, np.ndarray]:
    """Log transforms column-wise, shifting non-positive columns as needed."""
    mins = X.min(axis=0)
    if policy == "strict" and np.any(mins <= 0):
        bad = int(np.argmax(mins <= 0))
        raise TableError(
            f"column {bad}: non-positive values not allowed under 'strict' policy"
        )
    shifts = np.where(mins <= 0, np.abs(mins) + 1.0, 0.0)
    return np.log(X + shifts), shifts


def _standardize(values: np.ndarray, name: str) -> tuple[np.ndarray, float, float]:
    mean = float(values.mean())
    std = float(values.std(ddof=1))
    if std <= 0.0 or not np.isfinite(std):
        raise TableError(f"column '{name}' has zero variance")
    return (values - mean) / std, mean, std


def dataset_from_arrays(
    X,
    y,
    names: Sequence[str] | None = None,
    response_name: str = "y",
    log_shift_policy: str = "shift",
) -> Dataset:
    """Build a :class:`Dataset` from an already-numeric matrix and response.

    Applies the log augmentation and standardization steps of
    :func:`preprocess` without any parsing, row cleaning, or encoding.
    """
    if log_shift_policy not in LOG_SHIFT_POLICIES:
        raise ValueError(f"unknown log-shift policy {log_shift_policy!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise TableError("X must be a 2-D matrix")
    n, m = X.shape
    if len(y) != n:
        raise TableError(f"response length {len(y)} does not match {n} rows")
    if n < 3:
        raise TableError(f"need at least 3 complete observations, have {n}")
    if m < 1:
        raise TableError("need at least one explanatory column")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise TableError("non-finite values in input arrays")

    if names is None:
        names = tuple(f"x{j + 1}" for j in range(m))
    else:
        names = tuple(str(nm) for nm in names)
        if len(names) != m:
            raise TableError(f"expected {m} column names, got {len(names)}")

    logs, shifts = _log_columns(X, log_shift_policy)

    design = np.empty((n, 2 * m))
    means = np.empty(2 * m + 1)
    stds = np.empty(2 * m + 1)
    all_names = list(names) + [f"log({nm})" for nm in names] + [response_name]
    for j in range(m):
        design[:, j], means[j], stds[j] = _standardize(X[:, j], names[j])
        design[:, j + m], means[j + m], stds[j + m] = _standardize(
            logs[:, j], all_names[j + m]
        )
    response, means[2 * m], stds[2 * m] = _standardize(y, response_name)

    # freeze the arrays: a Dataset is shared across solves and threads
    for array in (design, response, means, stds, shifts):
        array.flags.writeable = False

    return Dataset(
        n=n,
        m=m,
        design=design,
        response=response,
        column_means=means,
        column_stds=stds,
        names=tuple(all_names),
        log_shifts=shifts,
    )


def _is_numeric_column(cells: list[object]) -> bool:
    return all(isinstance(cell, float) for cell in cells)


def preprocess(
    raw: RawTable,
    response: str,
    log_shift_policy: str = "shift",
) -> Dataset:
    """Clean a raw table and build the standardized, log-augmented dataset.

    Steps, in order: drop rows containing any missing cell; one-hot encode
    categorical columns (dropping the lexicographically first level of each);
    attach a log transform to every numeric column, shifting columns whose
    minimum is non-positive by ``|min| + 1``; standardize everything,
    including the response, to mean 0 and sample standard deviation 1.

    Raises
    ------
    TableError
        On a missing response column, a non-numeric response, fewer than 3
        complete rows, or any column that is constant after cleaning.
    """
    if response not in raw.column_names:
        raise TableError(f"response column '{response}' not found")
    response_index = raw.column_names.index(response)

    kept_rows = [row for row in raw.cells if all(cell is not None for cell in row)]
    if len(kept_rows) < 3:
        raise TableError(
            f"need at least 3 complete observations, have {len(kept_rows)}"
        )

    columns: list[np.ndarray] = []
    names: list[str] = []
    y = None
    for col_index, name in enumerate(raw.column_names):
        cells = [row[col_index] for row in kept_rows]
        if col_index == response_index:
            if not _is_numeric_column(cells):
                raise TableError(f"response column '{name}' is not numeric")
            y = np.asarray(cells, dtype=float)
            continue
        if _is_numeric_column(cells):
            columns.append(np.asarray(cells, dtype=float))
            names.append(name)
        else:
            labels = [str(cell) for cell in cells]
            levels = sorted(set(labels))
            if len(levels) < 2:
                raise TableError(f"column '{name}' has zero variance")
            for level in levels[1:]:  # first level is the dropped baseline
                columns.append(
                    np.asarray([1.0 if lab == level else 0.0 for lab in labels])
                )
                names.append(f"{name}={level}")

    if not columns:
        raise TableError("no explanatory columns remain")
    X = np.column_stack(columns)
    return dataset_from_arrays(
        X, y, names=names, response_name=response, log_shift_policy=log_shift_policy
    )


def transform_like(dataset: Dataset, X) -> np.ndarray:
    """Map new raw explanatory rows into the dataset's standardized design.

    Uses the training log shifts, means, and standard deviations, so the
    result is directly comparable with ``dataset.design``.  Values that fall
    outside a log transform's domain come back as NaN.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != dataset.m:
        raise TableError(f"expected a 2-D matrix with {dataset.m} columns")
    with np.errstate(invalid="ignore", divide="ignore"):
        logs = np.log(X + dataset.log_shifts)
    full = np.hstack([X, logs])
    means = dataset.column_means[: 2 * dataset.m]
    stds = dataset.column_stds[: 2 * dataset.m]
    return (full - means) / stds
