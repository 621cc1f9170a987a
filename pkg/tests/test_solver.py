import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regsel import (
    ConfigError,
    DegreesOfFreedomError,
    SignificanceConfig,
    SolveStatus,
    SolverConfig,
    check_candidate,
    dataset_from_arrays,
    node_bound,
    ols_fit,
    run_diagnostics,
    solve_base,
    solve_lazy,
    solve_penalty,
)

from conftest import make_instance
from oracles import (
    best_feasible_by_enumeration,
    best_subset_by_enumeration,
    enumerate_diagnostics,
    enumerate_sse,
    lstsq_sse,
    pair_legal_subsets,
)

# Frozen scan results: seeds whose enumerations exhibit the scenario named.
MIXED_FEASIBILITY_SEEDS = [27, 29, 37, 42, 51]  # best-SSE subset fails a test
ALL_INFEASIBLE_SEEDS = [5, 9, 11]  # no subset passes everything


def scan_instance(seed):
    hetero = seed % 2 == 1
    return make_instance(
        seed,
        n=60,
        m=5,
        n_true=2,
        noise=0.5 if hetero else 1.2,
        hetero=hetero,
        positive=hetero,
    )


class TestSolveBase:
    def test_planted_model_recovered(self, planted_dataset):
        outcome = solve_base(planted_dataset, 3)
        assert outcome.status == SolveStatus.OPTIMAL
        assert outcome.subset == (0, 2, 5)
        assert outcome.fit.sse < 1e-16
        assert outcome.diagnostics is not None  # attached for reporting

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_matches_enumeration(self, seed, k):
        # 12 augmented columns, k up to 4: full brute-force comparison
        ds = make_instance(seed, n=50, m=6)
        outcome = solve_base(ds, k)
        _, best_sse = best_subset_by_enumeration(ds, k)
        assert outcome.status == SolveStatus.OPTIMAL
        assert outcome.fit.sse == pytest.approx(best_sse, rel=1e-8)

    def test_k_equals_m_chooses_one_per_pair(self):
        ds = make_instance(3, n=50, m=5)
        outcome = solve_base(ds, 5)
        assert outcome.status == SolveStatus.OPTIMAL
        groups = sorted(j % 5 for j in outcome.subset)
        assert groups == [0, 1, 2, 3, 4]
        _, best_sse = best_subset_by_enumeration(ds, 5)
        assert outcome.fit.sse == pytest.approx(best_sse, rel=1e-8)

    def test_k_validation(self, small_dataset):
        with pytest.raises(ConfigError):
            solve_base(small_dataset, 0)
        with pytest.raises(ConfigError):
            solve_base(small_dataset, small_dataset.m + 1)

    def test_dof_validation(self):
        rng = np.random.default_rng(0)
        ds = dataset_from_arrays(rng.normal(size=(4, 3)), rng.normal(size=4))
        with pytest.raises(DegreesOfFreedomError):
            solve_base(ds, 3)

    def test_excluded_subsets_are_skipped(self, planted_dataset):
        best = solve_base(planted_dataset, 2)
        excluded = frozenset({best.subset})
        second = solve_base(planted_dataset, 2, excluded=excluded)
        assert second.subset != best.subset
        assert second.fit.sse >= best.fit.sse - 1e-12
        # oracle: runner-up from enumeration
        table = [(s, sse) for s, sse in enumerate_sse(planted_dataset, 2)
                 if s != best.subset]
        runner_sse = min(sse for _, sse in table)
        assert second.fit.sse == pytest.approx(runner_sse, rel=1e-8)

    def test_all_subsets_excluded_reports_infeasible(self):
        rng = np.random.default_rng(1)
        ds = dataset_from_arrays(rng.normal(size=(20, 2)), rng.normal(size=20))
        everything = frozenset(pair_legal_subsets(2, 1))
        outcome = solve_base(ds, 1, excluded=everything)
        assert outcome.subset is None
        assert outcome.status == SolveStatus.INFEASIBLE_WITH_ALTERNATIVE


class TestSearchProperties:
    @given(
        seed=st.integers(min_value=0, max_value=100_000),
        m=st.integers(min_value=2, max_value=4),
        k=st.integers(min_value=1, max_value=3),
    )
    @settings(max_examples=25, deadline=None)
    def test_base_always_matches_enumeration(self, seed, m, k):
        k = min(k, m)
        ds = make_instance(seed, n=24, m=m, n_true=min(2, m), noise=0.8)
        outcome = solve_base(ds, k)
        _, best_sse = best_subset_by_enumeration(ds, k)
        assert outcome.fit.sse == pytest.approx(best_sse, rel=1e-8, abs=1e-12)

    @given(
        seed=st.integers(min_value=0, max_value=100_000),
        hetero=st.booleans(),
    )
    @settings(max_examples=15, deadline=None)
    def test_lazy_feasibility_always_matches_enumeration(self, seed, hetero):
        ds = make_instance(
            seed, n=30, m=3, n_true=2, noise=1.0, hetero=hetero, positive=hetero
        )
        cfg = SolverConfig()
        outcome = solve_lazy(ds, 2, cfg)
        rows = enumerate_diagnostics(ds, 2, cfg.significance)
        feas_subset, feas_sse = best_feasible_by_enumeration(rows)
        if feas_subset is None:
            assert outcome.subset is None
            assert outcome.alternative is not None
        else:
            assert outcome.subset is not None
            assert outcome.fit.sse == pytest.approx(feas_sse, rel=1e-8, abs=1e-12)


class TestNodeBound:
    def test_leaf_bound_is_exact_sse(self, small_dataset):
        subset = (0, 2)
        others = frozenset(range(2 * small_dataset.m)) - set(subset)
        bound = node_bound(small_dataset, frozenset(subset), others)
        assert bound == pytest.approx(lstsq_sse(small_dataset, subset), rel=1e-10)

    def test_root_bound_is_full_matrix_sse(self, small_dataset):
        bound = node_bound(small_dataset, frozenset(), frozenset())
        full = lstsq_sse(small_dataset, tuple(range(2 * small_dataset.m)))
        assert bound == pytest.approx(full, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_bound_below_every_completion(self, seed):
        ds = make_instance(seed, n=40, m=3)
        k = 2
        rng = np.random.default_rng(seed)
        for _ in range(10):
            fixed_in = frozenset(
                rng.choice(2 * ds.m, size=rng.integers(0, 2), replace=False).tolist()
            )
            if not ds.is_pair_legal(fixed_in):
                continue
            pool = [j for j in range(2 * ds.m) if j not in fixed_in]
            fixed_out = frozenset(
                int(j) for j in rng.choice(pool, size=rng.integers(0, 3), replace=False)
            )
            bound = node_bound(ds, fixed_in, fixed_out)
            completions = [
                s
                for s in pair_legal_subsets(ds.m, k)
                if fixed_in <= set(s) and not (set(s) & fixed_out)
            ]
            for subset in completions:
                assert bound <= lstsq_sse(ds, subset) + 1e-9


class TestCheckCandidate:
    def test_feasible_candidate(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(80, 3))
        y = X @ np.array([2.0, -1.5, 1.0]) + rng.normal(scale=0.5, size=80)
        ds = dataset_from_arrays(X, y)
        verdict, fit, report = check_candidate(ds, (0, 1, 2), SolverConfig(), None)
        assert verdict == "feasible"
        assert report.feasible

    def test_insignificant_coefficient_cut(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(60, 2))
        y = 2.0 * X[:, 0] + rng.normal(size=60)  # column 1 is pure noise
        ds = dataset_from_arrays(X, y)
        verdict, fit, report = check_candidate(ds, (0, 1), SolverConfig(), None)
        assert verdict == "cut"
        assert report.n_insignificant >= 1

    def test_joint_hetero_cut_despite_significant_coefficients(self):
        rng = np.random.default_rng(4)
        n = 250
        X = np.exp(rng.normal(size=(n, 2)) * 0.8)
        signal = X @ np.array([1.2, 0.9])
        y = signal + rng.normal(size=n) * (1.0 + np.abs(signal)) * 0.4
        ds = dataset_from_arrays(X, y)
        verdict, fit, report = check_candidate(ds, (0, 1), SolverConfig(), None)
        assert report.n_insignificant == 0
        assert not report.hetero_ok
        assert verdict == "cut"

    def test_rank_deficient_cut_without_report(self):
        rng = np.random.default_rng(2)
        base = rng.normal(size=30)
        X = np.column_stack([base, base.copy(), rng.normal(size=30)])
        ds = dataset_from_arrays(X, rng.normal(size=30))
        verdict, fit, report = check_candidate(ds, (0, 1), SolverConfig(), None)
        assert verdict == "cut"
        assert report is None


class TestSolveLazy:
    @pytest.mark.parametrize("seed", [0, 2, 4])
    def test_inactive_constraints_reduce_to_base(self, seed):
        ds = make_instance(seed, n=80, m=5, n_true=2, noise=0.15)
        base = solve_base(ds, 2)
        lazy = solve_lazy(ds, 2)
        if lazy.subset == base.subset:  # constraints never fired
            assert lazy.fit.sse == pytest.approx(base.fit.sse, rel=1e-12)

    @pytest.mark.parametrize("seed", MIXED_FEASIBILITY_SEEDS)
    def test_returns_best_feasible_when_best_sse_fails(self, seed):
        ds = scan_instance(seed)
        cfg = SolverConfig()
        rows = enumerate_diagnostics(ds, 2, cfg.significance)
        feas_subset, feas_sse = best_feasible_by_enumeration(rows)
        best_subset, _ = best_subset_by_enumeration(ds, 2)
        assert feas_subset != best_subset  # scenario sanity
        outcome = solve_lazy(ds, 2, cfg)
        assert outcome.status == SolveStatus.OPTIMAL
        assert outcome.fit.sse == pytest.approx(feas_sse, rel=1e-8)
        assert outcome.diagnostics.feasible

    @pytest.mark.parametrize("seed", ALL_INFEASIBLE_SEEDS)
    def test_infeasible_instances_yield_alternative(self, seed):
        ds = scan_instance(seed)
        cfg = SolverConfig()
        rows = enumerate_diagnostics(ds, 2, cfg.significance)
        assert best_feasible_by_enumeration(rows)[0] is None  # scenario sanity
        outcome = solve_lazy(ds, 2, cfg)
        assert outcome.status == SolveStatus.INFEASIBLE_WITH_ALTERNATIVE
        assert outcome.subset is None
        assert outcome.alternative is not None
        assert outcome.alternative_score is not None
        # the alternative is one of the cut candidates
        assert outcome.alternative.subset in outcome.cut_pool

    def test_disabled_diagnostics_reduce_to_base(self):
        ds = scan_instance(27)
        cfg = SolverConfig(
            significance=SignificanceConfig(
                coef_confidence=1e-9,
                linearity_confidence=1 - 1e-9,
                hetero_confidence=1 - 1e-9,
            ),
            residual_tests=False,
        )
        lazy = solve_lazy(ds, 2, cfg)
        base = solve_base(ds, 2)
        assert lazy.subset == base.subset
        assert lazy.cuts_added == 0

    @pytest.mark.parametrize("seed", MIXED_FEASIBILITY_SEEDS[:2])
    def test_cut_pool_members_really_violate(self, seed):
        ds = scan_instance(seed)
        cfg = SolverConfig()
        outcome = solve_lazy(ds, 2, cfg)
        for subset in outcome.cut_pool:
            fit = ols_fit(ds, subset)
            if fit.std_errors is None:
                continue  # cut for rank deficiency
            report = run_diagnostics(ds, fit, cfg.significance)
            assert not report.feasible

    @pytest.mark.parametrize("seed", MIXED_FEASIBILITY_SEEDS[:2])
    def test_optimality_audit(self, seed):
        # every subset cheaper than the winner must fail some test
        ds = scan_instance(seed)
        cfg = SolverConfig()
        outcome = solve_lazy(ds, 2, cfg)
        assert outcome.status == SolveStatus.OPTIMAL
        for subset, sse, report in enumerate_diagnostics(ds, 2, cfg.significance):
            if sse < outcome.fit.sse - 1e-9:
                assert report is None or not report.feasible

    def test_zero_time_limit_still_yields_something(self):
        ds = scan_instance(27)
        outcome = solve_lazy(ds, 2, SolverConfig(time_limit=0.0))
        assert outcome.status in (
            SolveStatus.BEST_FEASIBLE,
            SolveStatus.ALTERNATIVE,
        )
        assert (outcome.subset is not None) or (outcome.alternative is not None)


class TestSolvePenalty:
    def test_same_search_different_comparator(self):
        # the alternative comparator never affects the search itself
        ds = scan_instance(5)
        lazy = solve_lazy(ds, 2)
        penalty = solve_penalty(ds, 2)
        assert penalty.status == lazy.status
        assert penalty.cut_pool == lazy.cut_pool
        assert penalty.nodes_explored == lazy.nodes_explored

    @pytest.mark.parametrize(
        "seed,m,noise", [(29, 6, 2.0), (85, 6, 2.0)]
    )
    def test_comparators_can_disagree(self, seed, m, noise):
        # frozen scan: staged and score-only folds keep different candidates
        ds = make_instance(
            seed, n=40, m=m, n_true=2, noise=noise, hetero=(seed % 3 == 0)
        )
        lazy = solve_lazy(ds, 3)
        penalty = solve_penalty(ds, 3)
        assert lazy.subset is None and penalty.subset is None
        assert lazy.alternative.subset != penalty.alternative.subset

    def test_identical_when_feasible_found(self, planted_dataset):
        lazy = solve_lazy(planted_dataset, 3)
        penalty = solve_penalty(planted_dataset, 3)
        assert lazy.subset == penalty.subset == (0, 2, 5)


class TestDeterminism:
    @pytest.mark.parametrize("seed", [27, 5])
    def test_repeat_runs_identical(self, seed):
        ds = scan_instance(seed)
        cfg = SolverConfig(seed=123)
        a = solve_lazy(ds, 2, cfg)
        b = solve_lazy(ds, 2, cfg)
        assert a.subset == b.subset
        assert a.status == b.status
        assert a.nodes_explored == b.nodes_explored
        assert a.cuts_added == b.cuts_added
        assert a.cut_pool == b.cut_pool
        if a.fit is not None:
            assert a.fit.sse == b.fit.sse
            np.testing.assert_array_equal(a.fit.coefficients, b.fit.coefficients)
        if a.alternative is not None:
            assert a.alternative == b.alternative
            assert a.alternative_score == b.alternative_score
