"""Dense least-squares core: subset fits, VIF, and adjusted R-squared.

Fits use a column-pivoted QR factorization so that near-collinear column
subsets (an original next to its log transform in a bound fit, say) are
detected and fall back to the minimum-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .data import Dataset

#: Rank tolerance, relative to the largest column norm of the selected block.
RANK_TOL = 1e-10


class DegreesOfFreedomError(ValueError):
    """Raised when a fit would leave fewer than one residual degree of freedom."""


@dataclass(frozen=True)
class FitResult:
    """Least-squares solution for one column subset.

    ``residuals`` is ``fitted - response`` and ``mse = sse / (n - k - 1)``
    with ``k`` selected columns; the intercept-free divisor is kept because
    every column is standardized.  ``std_errors`` is ``None`` when the
    selected block is rank-deficient (the coefficients are then the
    minimum-norm solution).
    """

    subset: tuple[int, ...]
    coefficients: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    sse: float
    mse: float
    std_errors: np.ndarray | None
    dof: int

    @property
    def k(self) -> int:
        return len(self.subset)

    @property
    def n(self) -> int:
        return len(self.residuals)

    @property
    def full_rank(self) -> bool:
        return self.std_errors is not None


def _validate_subset(dataset: Dataset, subset: Sequence[int]) -> tuple[int, ...]:
    indices = tuple(sorted(int(j) for j in subset))
    if not indices:
        raise ValueError("empty column subset")
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate indices in subset {indices}")
    if indices[0] < 0 or indices[-1] >= 2 * dataset.m:
        raise ValueError(f"subset {indices} outside 0..{2 * dataset.m - 1}")
    if not dataset.is_pair_legal(indices):
        raise ValueError(f"subset {indices} selects a column and its log pair")
    return indices


def ols_fit(dataset: Dataset, subset: Sequence[int]) -> FitResult:
    """Least-squares fit of the response on the selected design columns.

    Parameters
    ----------
    dataset : Dataset
    subset : sequence of column indices
        Must be pair-legal and leave ``n - k - 1 >= 1`` degrees of freedom.

    Returns
    -------
    FitResult
        Coefficients minimizing the sum of squared errors; standard errors
        ``sqrt(mse * diag((A'A)^-1))`` when the block has full column rank.
    """
    indices = _validate_subset(dataset, subset)
    k = len(indices)
    n = dataset.n
    dof = n - k - 1
    if dof < 1:
        raise DegreesOfFreedomError(
            f"n - k - 1 = {dof} < 1 for n={n}, k={k}"
        )

    A = dataset.design[:, list(indices)]
    b = dataset.response

    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    col_norms = np.linalg.norm(A, axis=0)
    tol = RANK_TOL * (col_norms.max() if k else 0.0)
    r_diag = np.abs(np.diag(R))
    rank = int(np.sum(r_diag > tol))

    if rank == k:
        coef_pivoted = scipy.linalg.solve_triangular(R, Q.T @ b)
        coefficients = np.empty(k)
        coefficients[piv] = coef_pivoted
        r_inv = scipy.linalg.solve_triangular(R, np.eye(k))
        unscaled = np.einsum("ij,ij->i", r_inv, r_inv)  # diag((A_p'A_p)^-1)
        gram_inv_diag = np.empty(k)
        gram_inv_diag[piv] = unscaled
    else:
        coefficients, *_ = np.linalg.lstsq(A, b, rcond=None)
        gram_inv_diag = None

    fitted = A @ coefficients
    residuals = fitted - b
    sse = float(residuals @ residuals)
    mse = sse / dof
    std_errors = (
        np.sqrt(np.maximum(mse * gram_inv_diag, 0.0))
        if gram_inv_diag is not None
        else None
    )
    return FitResult(
        subset=indices,
        coefficients=coefficients,
        fitted=fitted,
        residuals=residuals,
        sse=sse,
        mse=mse,
        std_errors=std_errors,
        dof=dof,
    )


def subset_sse(dataset: Dataset, columns: Sequence[int]) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares coefficients and SSE for arbitrary columns.

    Unlike :func:`ols_fit` this accepts rank-deficient and pair-overlapping
    column sets, which arise in relaxation-style bound fits over supersets.
    """
    cols = list(columns)
    if not cols:
        b = dataset.response
        return np.empty(0), float(b @ b)
    A = dataset.design[:, cols]
    coefficients, *_ = np.linalg.lstsq(A, dataset.response, rcond=None)
    residuals = A @ coefficients - dataset.response
    return coefficients, float(residuals @ residuals)


def vif(dataset: Dataset, subset: Sequence[int], j: int) -> float:
    """Variance inflation factor of column ``j`` within ``subset``.

    Returns ``1 / (1 - R^2_j)`` where ``R^2_j`` comes from regressing column
    ``j`` on the other subset columns; ``inf`` when the column is (numerically)
    a perfect linear combination of the others.  Always at least 1.
    """
    indices = tuple(sorted(int(i) for i in subset))
    if len(indices) < 2:
        raise ValueError("VIF needs a subset of at least two columns")
    if j not in indices:
        raise ValueError(f"column {j} is not in subset {indices}")
    others = [i for i in indices if i != j]
    target = dataset.design[:, j]
    coef, *_ = np.linalg.lstsq(dataset.design[:, others], target, rcond=None)
    resid = target - dataset.design[:, others] @ coef
    total = float(target @ target)
    r_squared = 1.0 - float(resid @ resid) / total
    if 1.0 - r_squared <= 1e-12:
        return float("inf")
    return max(1.0, 1.0 / (1.0 - r_squared))


def adjusted_r2(sse: float, n: int, k: int) -> float:
    """Adjusted R-squared for a standardized-response fit.

    With the response standardized to sample standard deviation 1 the total
    sum of squares is exactly ``n - 1``, so this reduces to
    ``1 - (sse / (n - k - 1)) / (sst / (n - 1))`` with ``sst = n - 1``.
    """
    dof = n - k - 1
    if dof < 1:
        raise DegreesOfFreedomError(f"n - k - 1 = {dof} < 1")
    sst = float(n - 1)
    return 1.0 - (sse / dof) / (sst / (n - 1))
