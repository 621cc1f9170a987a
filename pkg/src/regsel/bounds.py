"""Coefficient-magnitude estimation and relaxation-based error bounds.

Two quantities are computed ahead of a constrained search: a sampled bound
``big_m`` on coefficient magnitudes, and a lower bound on the mean squared
error of *any* pair-legal k-subset, obtained from the continuous relaxation

    minimize ||A x - b||^2
    subject to  sum_j |x_j| <= k * M   and   |x_j| + |x_pair(j)| <= M.

The relaxation is solved without an external optimizer: projected gradient
descent with backtracking, where feasibility is restored by Dykstra's
alternating projections onto the two constraint families.

From the relaxation value a lower bound on every selected coefficient's
standard error follows.  Under unit-sample-variance column scaling the Gram
diagonal satisfies ``[(A_S'A_S)^-1]_jj = VIF_j / (n - 1) >= 1 / (n - 1)``, so

    stderr_j >= sqrt(mse_lb / (n - 1)).

That bound powers a sound pre-filter: a candidate whose coefficient falls
below ``t_critical * stderr_lb`` provably fails the exact t-test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .diagnostics import SignificanceConfig, student_t_two_sided_critical
from .linalg import DegreesOfFreedomError, FitResult

_MAX_ITER = 10_000
_REL_TOL = 1e-9


@dataclass(frozen=True)
class BoundContext:
    """Precomputed bounds used by the constrained search for one (dataset, k)."""

    big_m: float
    mse_lb: float
    stderr_lb: float
    t_critical: float
    k: int
    relaxation_converged: bool = True


@dataclass(frozen=True)
class RelaxationResult:
    """Outcome of the continuous relaxation solve."""

    mse_lb: float
    converged: bool
    iterations: int


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto the L1 ball of the given radius."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    v = np.asarray(v, dtype=float)
    if radius == 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(u) + 1)
    # ">=" keeps the index set non-empty when radius underflows css rounding
    rho = np.nonzero(u * idx >= css - radius)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_pair_caps(v: np.ndarray, m: int, cap: float) -> np.ndarray:
    """Projection onto the product of per-pair constraints |x_j|+|x_{j+m}| <= cap.

    The pairs partition the coordinates, so each 2-D block projects
    independently onto a small L1 ball (done here in closed form).
    """
    if cap < 0:
        raise ValueError("cap must be non-negative")
    v = np.asarray(v, dtype=float)
    a, c = v[:m], v[m:]
    aa, cc = np.abs(a), np.abs(c)
    over = aa + cc > cap
    if not np.any(over):
        return v.copy()
    theta = (aa + cc - cap) / 2.0
    big = np.maximum(aa, cc)
    small = np.minimum(aa, cc)
    both_active = small > theta
    new_big = np.where(both_active, big - theta, np.minimum(big, cap))
    new_small = np.where(both_active, small - theta, 0.0)
    a_is_big = aa >= cc
    na = np.where(over, np.where(a_is_big, new_big, new_small), aa)
    nc = np.where(over, np.where(a_is_big, new_small, new_big), cc)
    return np.concatenate([np.sign(a) * na, np.sign(c) * nc])


def project_feasible(v: np.ndarray, m: int, big_m: float, k: int) -> np.ndarray:
    """Projection onto the intersection of the L1 ball and the pair caps.

    Runs Dykstra's alternating projections; a final downscale guarantees the
    returned point is feasible even if the iteration stopped early (both
    constraint families are closed under shrinking toward the origin).
    """
    total = k * big_m
    y = np.asarray(v, dtype=float).copy()
    p = np.zeros_like(y)
    q = np.zeros_like(y)
    for _ in range(200):
        u = project_l1_ball(y + p, total)
        p = y + p - u
        y_new = project_pair_caps(u + q, m, big_m)
        q = u + q - y_new
        if np.max(np.abs(y_new - y)) <= 1e-14 * max(1.0, big_m):
            y = y_new
            break
        y = y_new
    norm1 = np.abs(y).sum()
    if norm1 > total and norm1 > 0.0:
        y = y * (total / norm1)
    return y


def estimate_big_m(
    dataset: Dataset,
    k: int,
    num_samples: int = 50,
    safety: float = 2.0,
    seed: int = 0,
) -> float:
    """Sampled bound on coefficient magnitudes over pair-legal k-subsets.

    Draws ``num_samples`` uniformly random pair-legal subsets (one member per
    chosen pair), fits each by least squares, and returns ``safety`` times the
    largest absolute coefficient seen.  Fully determined by ``seed``.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if not 1 <= k <= dataset.m:
        raise ValueError(f"k={k} outside 1..{dataset.m}")
    rng = np.random.default_rng(seed)
    # the whole sample sequence is drawn up front, so the max-reduction over
    # fits is free to run in any order
    samples = []
    for _ in range(num_samples):
        groups = rng.choice(dataset.m, size=k, replace=False)
        take_log = rng.integers(0, 2, size=k)
        samples.append(np.sort(groups + take_log * dataset.m))
    largest = 0.0
    for columns in samples:
        coefficients, *_ = np.linalg.lstsq(
            dataset.design[:, columns], dataset.response, rcond=None
        )
        largest = max(largest, float(np.abs(coefficients).max()))
    return safety * largest


def mse_lower_bound(
    dataset: Dataset,
    k: int,
    big_m: float,
    max_iter: int = _MAX_ITER,
    rel_tol: float = _REL_TOL,
) -> RelaxationResult:
    """Lower bound on the MSE of every pair-legal k-subset fit.

    Solves the continuous relaxation by projected gradient descent with
    backtracking.  If the iteration cap is reached before the objective
    settles, the method falls back to the unconstrained full-design SSE,
    which is always a valid (if weaker) lower bound, and flags it.
    """
    if big_m < 0:
        raise ValueError("big_m must be non-negative")
    if not 1 <= k <= dataset.m:
        raise ValueError(f"k={k} outside 1..{dataset.m}")
    dof = dataset.n - k - 1
    if dof < 1:
        raise DegreesOfFreedomError(f"n - k - 1 = {dof} < 1")

    A = dataset.design
    b = dataset.response
    m = dataset.m

    if big_m == 0.0:
        # only x = 0 is feasible
        return RelaxationResult(mse_lb=float(b @ b) / dof, converged=True, iterations=0)

    full_coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = A @ full_coef - b
    full_sse = float(resid @ resid)

    x = project_feasible(full_coef, m, big_m, k)
    if np.abs(x - full_coef).max() <= 1e-14 * max(1.0, big_m):
        # the unconstrained optimum is feasible, nothing to iterate
        return RelaxationResult(mse_lb=full_sse / dof, converged=True, iterations=0)

    def objective(point):
        r = A @ point - b
        return float(r @ r)

    lipschitz = 2.0 * np.linalg.norm(A, 2) ** 2
    step = 1.0 / lipschitz
    f_x = objective(x)
    for iteration in range(1, max_iter + 1):
        grad = 2.0 * (A.T @ (A @ x - b))
        while True:
            candidate = project_feasible(x - step * grad, m, big_m, k)
            delta = candidate - x
            f_cand = objective(candidate)
            quad_model = f_x + float(grad @ delta) + float(delta @ delta) / (2 * step)
            if f_cand <= quad_model + 1e-15 * max(1.0, abs(f_x)):
                break
            step *= 0.5
            if step * lipschitz < 1e-12:
                break  # step collapsed; treat as stalled
        if f_cand > f_x:
            candidate, f_cand = x, f_x
        change = f_x - f_cand
        x, f_x = candidate, f_cand
        if change <= rel_tol * max(1.0, f_x):
            return RelaxationResult(
                mse_lb=f_x / dof, converged=True, iterations=iteration
            )
        step *= 1.5  # allow the step to grow back after backtracking

    # Not converged: the current iterate only upper-bounds the relaxation
    # optimum, so it cannot certify a bound.  Fall back to the full fit.
    return RelaxationResult(mse_lb=full_sse / dof, converged=False, iterations=max_iter)


def build_bound_context(
    dataset: Dataset,
    k: int,
    cfg: SignificanceConfig,
    num_samples: int = 50,
    safety: float = 2.0,
    seed: int = 0,
) -> BoundContext:
    """Assemble the search bounds for one (dataset, k) pair."""
    big_m = estimate_big_m(dataset, k, num_samples=num_samples, safety=safety, seed=seed)
    relaxation = mse_lower_bound(dataset, k, big_m)
    stderr_lb = float(np.sqrt(relaxation.mse_lb / (dataset.n - 1)))
    t_critical = student_t_two_sided_critical(1.0 - cfg.coef_confidence, dataset.n - k - 1)
    return BoundContext(
        big_m=big_m,
        mse_lb=relaxation.mse_lb,
        stderr_lb=stderr_lb,
        t_critical=t_critical,
        k=k,
        relaxation_converged=relaxation.converged,
    )


def relaxed_ttest_filter(fit: FitResult, ctx: BoundContext) -> bool:
    """Cheap necessary condition for all coefficient t-tests to pass.

    Returns False only when some selected coefficient is so small that the
    exact t-test must fail (``|coef| < t_critical * stderr_lb`` while the true
    standard error is at least ``stderr_lb``).  A True result decides nothing.
    """
    threshold = ctx.t_critical * ctx.stderr_lb
    return bool(np.all(np.abs(fit.coefficients) >= threshold))
