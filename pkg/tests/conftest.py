"""Shared fixtures and synthetic-instance generators."""

from __future__ import annotations

import numpy as np
import pytest

from regsel import Dataset, dataset_from_arrays


def make_instance(
    seed: int,
    n: int = 60,
    m: int = 8,
    n_true: int = 3,
    noise: float = 0.3,
    hetero: bool = False,
    positive: bool = False,
) -> Dataset:
    """Random correlated design with a planted sparse signal.

    Half the columns are exponentiated so both log-shift branches (plain log
    and shifted log) are exercised.  With ``hetero=True`` the error standard
    deviation grows with the signal magnitude.
    """
    rng = np.random.default_rng(seed)
    latent = rng.normal(size=(n, max(3, m // 2)))
    X = np.empty((n, m))
    for j in range(m):
        weights = rng.normal(size=latent.shape[1])
        X[:, j] = latent @ weights * 0.6 + rng.normal(size=n)
    if positive:
        X = np.exp(0.5 * X)
    else:
        X[:, 1::2] = np.exp(0.5 * X[:, 1::2])  # mixed-sign and positive columns

    true_cols = rng.choice(m, size=n_true, replace=False)
    beta = rng.uniform(0.5, 1.5, size=n_true) * rng.choice([-1.0, 1.0], size=n_true)
    signal = X[:, true_cols] @ beta
    eps = rng.normal(size=n)
    if hetero:
        y = signal + noise * eps * (1.0 + np.abs(signal))
    else:
        y = signal + noise * eps * max(1.0, float(np.std(signal)))
    return dataset_from_arrays(X, y)


@pytest.fixture
def small_dataset() -> Dataset:
    """Deterministic 12 x 3 dataset with mixed-sign and positive columns."""
    rng = np.random.default_rng(42)
    X = np.column_stack(
        [
            rng.normal(size=12),
            np.exp(rng.normal(size=12)),
            rng.uniform(-2.0, 3.0, size=12),
        ]
    )
    y = X[:, 0] - 0.5 * X[:, 2] + rng.normal(scale=0.4, size=12)
    return dataset_from_arrays(X, y)


@pytest.fixture
def planted_dataset() -> Dataset:
    """Noise-free response built from columns 0, 2, 5 of an 8-column design."""
    rng = np.random.default_rng(7)
    X = rng.normal(size=(50, 8))
    y = 1.5 * X[:, 0] - 2.0 * X[:, 2] + 0.8 * X[:, 5]
    return dataset_from_arrays(X, y)
