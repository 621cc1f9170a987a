"""Scikit-learn style estimator wrapping the subset-selection solvers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import dataset_from_arrays, transform_like
from .driver import METHODS, run_method
from .solver import SolverConfig
from .altsol import PenaltyParams
from .diagnostics import SignificanceConfig, run_diagnostics
from . import linalg


class BestSubsetRegressor(BaseEstimator, RegressorMixin):
    """Best-subset linear regression with statistical-validity constraints.

    Fits the response on exactly ``k`` columns chosen from the features and
    their log transforms (never a feature together with its own log), using
    exact branch-and-bound.  With ``method="lazy"`` every candidate must pass
    coefficient t-tests, a residual linearity check, and heteroscedasticity
    tests; if no subset passes, the best near-feasible alternative found is
    fitted instead and flagged through ``status_``.

    Parameters
    ----------
    k : int, default=3
        Number of selected columns.
    method : {"lazy", "base", "fs", "iter", "penalty"}, default="lazy"
        ``base`` ignores the statistical tests, ``fs`` is greedy forward
        selection, ``iter`` re-solves with cuts until the t-tests pass, and
        ``penalty`` replaces the staged alternative comparison with a plain
        penalty score.
    coef_confidence, linearity_confidence, hetero_confidence : float
        Confidence levels of the three test families.
    mse_weight, insig_count_weight, insig_pvalue_weight, linearity_weight, \
hetero_weight, tolerance : float
        Alternative-comparison penalty weights and tolerance.
    bigm_samples : int, default=50
        Random subsets sampled when estimating the coefficient bound.
    bigm_safety : float, default=2.0
        Safety factor on the sampled coefficient bound.
    seed : int, default=0
        Seed for the coefficient-bound sampling; fixing it makes fits
        bit-reproducible.
    time_limit : float, default=600.0
        Wall-clock budget of the search, in seconds.
    residual_tests : bool, default=True
        When False only coefficient t-tests are enforced.

    Attributes
    ----------
    subset_ : tuple of int
        Selected column indices into the augmented design (``0..m-1``
        originals, ``m..2m-1`` log transforms).
    subset_names_ : tuple of str
        Labels of the selected columns.
    coef_ : ndarray of shape (k,)
        Coefficients in the standardized design space.
    status_ : str
        Solve status; ``"alternative"`` or ``"infeasible_with_alternative"``
        mean the fitted model is the near-feasible fallback.
    diagnostics_ : DiagnosticsReport
        Test battery results for the fitted model.
    outcome_ : SolveOutcome
        The full solver outcome, including search counters.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> X = rng.normal(size=(80, 6))
    >>> y = 2.0 * X[:, 0] - X[:, 3] + rng.normal(scale=0.1, size=80)
    >>> model = BestSubsetRegressor(k=2, method="base").fit(X, y)
    >>> sorted(model.subset_) == [0, 3]
    True
    """

    def __init__(
        self,
        k=3,
        method="lazy",
        coef_confidence=0.95,
        linearity_confidence=0.99,
        hetero_confidence=0.99,
        mse_weight=4.0,
        insig_count_weight=0.5,
        insig_pvalue_weight=6.0,
        linearity_weight=0.5,
        hetero_weight=0.5,
        tolerance=0.1,
        bigm_samples=50,
        bigm_safety=2.0,
        seed=0,
        time_limit=600.0,
        residual_tests=True,
    ):
        self.k = k
        self.method = method
        self.coef_confidence = coef_confidence
        self.linearity_confidence = linearity_confidence
        self.hetero_confidence = hetero_confidence
        self.mse_weight = mse_weight
        self.insig_count_weight = insig_count_weight
        self.insig_pvalue_weight = insig_pvalue_weight
        self.linearity_weight = linearity_weight
        self.hetero_weight = hetero_weight
        self.tolerance = tolerance
        self.bigm_samples = bigm_samples
        self.bigm_safety = bigm_safety
        self.seed = seed
        self.time_limit = time_limit
        self.residual_tests = residual_tests

    def _solver_config(self) -> SolverConfig:
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
            residual_tests=self.residual_tests,
        )

    def fit(self, X, y):
        """Select a subset and fit the regression.

        Parameters
        ----------
        X : array-like of shape (n_samples, n_features)
            Numeric feature matrix; a DataFrame's column names are kept.
        y : array-like of shape (n_samples,)
            Response values.

        Returns
        -------
        self
        """
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        feature_names = None
        if hasattr(X, "columns"):
            feature_names = [str(c) for c in X.columns]
        X, y = check_X_y(X, y, y_numeric=True, dtype=np.float64)

        dataset = dataset_from_arrays(X, y, names=feature_names)
        outcome, _ = run_method(dataset, self.k, self.method, self._solver_config())

        fit = outcome.fit
        report = outcome.diagnostics
        if fit is None:
            if outcome.alternative is None:
                raise RuntimeError("solve produced neither a model nor an alternative")
            fit = linalg.ols_fit(dataset, outcome.alternative.subset)
            report = run_diagnostics(
                dataset, fit, self._solver_config().significance,
                residual_tests=self.residual_tests,
            )

        self.dataset_ = dataset
        self.outcome_ = outcome
        self.status_ = outcome.status.value
        self.fit_result_ = fit
        self.diagnostics_ = report
        self.subset_ = fit.subset
        self.subset_names_ = tuple(dataset.names[j] for j in fit.subset)
        self.coef_ = fit.coefficients.copy()
        self.n_features_in_ = dataset.m
        if feature_names is not None:
            self.feature_names_in_ = np.asarray(feature_names, dtype=object)
        return self

    def predict(self, X):
        """Predict the response for new rows, in original response units."""
        check_is_fitted(self, "subset_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        design = transform_like(self.dataset_, X)
        standardized = design[:, list(self.subset_)] @ self.coef_
        mean = self.dataset_.column_means[-1]
        std = self.dataset_.column_stds[-1]
        return standardized * std + mean
