"""Stopping rules and selection plumbing on constructed paths."""

import numpy as np
import pytest

from helpers import orthogonal_dataset as _orthogonal_dataset
from stepfdr.penalties import PenaltySpec, step_alpha, step_costs
from stepfdr.quantiles import two_sided_pvalue
from stepfdr.regress import Dataset, forward_path, least_squares, standardize
from stepfdr.selector import (
    RULES,
    default_rule,
    msfdr_iterative,
    penalized_trace,
    select,
    stop,
    tsfdr_select,
)


class TestStop:
    def test_first_local_min(self):
        assert stop(np.array([5.0, 4.0, 3.0, 3.5, 2.0]), "first-local-min") == 2
        assert stop(np.array([5.0, 6.0]), "first-local-min") == 0
        assert stop(np.array([5.0, 4.0, 3.0]), "first-local-min") == 2

    def test_ties_continue(self):
        # A flat stretch counts as continued descent under every rule.
        trace = np.array([5.0, 4.0, 4.0, 4.5])
        assert stop(trace, "first-local-min") == 2
        assert stop(trace, "last-crossing") == 2

    def test_global_min(self):
        assert stop(np.array([5.0, 4.0, 6.0, 1.0, 2.0]), "global-min") == 3
        assert stop(np.array([1.0, 2.0, 3.0]), "global-min") == 0

    def test_last_crossing(self):
        assert stop(np.array([5.0, 6.0, 4.0, 7.0, 8.0]), "last-crossing") == 2
        assert stop(np.array([5.0, 6.0, 7.0]), "last-crossing") == 0
        assert stop(np.array([5.0, 4.0, 3.0]), "last-crossing") == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            stop(np.array([]), "global-min")
        with pytest.raises(ValueError):
            stop(np.array([1.0, 2.0]), "steepest")


class TestDefaults:
    def test_default_rules(self):
        assert default_rule(PenaltySpec("msfdr", q=0.05)) == "first-local-min"
        assert default_rule(PenaltySpec("tsfdr", q=0.05)) == "first-local-min"
        assert default_rule(PenaltySpec("bh", q=0.05)) == "last-crossing"
        for fam in ("aic", "dj", "fs", "tk", "bm", "gf"):
            assert default_rule(PenaltySpec(fam)) == "global-min"
        assert set(RULES) == {"first-local-min", "global-min", "last-crossing"}


class TestPenalizedTrace:
    def test_matches_direct_formula(self):
        ds = _orthogonal_dataset([0.001, 0.01, 0.2, 0.6])
        path = forward_path(ds, sigma2=1.0)
        spec = PenaltySpec("msfdr", q=0.05)
        trace = penalized_trace(path, spec, ds.m)
        costs = step_costs(spec, ds.m, path.depth)
        ref = path.rss.copy()
        ref[1:] += np.cumsum(costs)  # sigma2 = 1
        assert np.allclose(trace, ref, atol=1e-12)


class TestSelect:
    def test_refit_matches_reference(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((40, 6))
        y = X[:, 0] * 4 + X[:, 3] * 3 + rng.standard_normal(40)
        ds = standardize(Dataset(y=y, X=X, names=tuple("abcdef")))
        res = select(ds, PenaltySpec("msfdr", q=0.05))
        coef, _ = least_squares(ds, list(res.selected))
        assert np.allclose(res.coefficients, coef)
        assert res.k_selected == len(res.selected)
        assert res.k_with_intercept == res.k_selected + 1  # standardized data
        assert res.sigma2_source == "estimated-from-full-model"

    def test_rule_override(self):
        # BH constants at q = 0.3, m = 5 are 0.06, 0.12, 0.18, 0.24, 0.30;
        # p2 sits above its constant but p3 below, so step-down and
        # step-up behaviour differ on the same trace.
        pvals = [0.01, 0.15, 0.17, 0.5, 0.6]
        ds = _orthogonal_dataset(pvals)
        spec = PenaltySpec("bh", q=0.3)
        k_flm = select(ds, spec, rule="first-local-min", sigma2=1.0).k_selected
        k_lc = select(ds, spec, rule="last-crossing", sigma2=1.0).k_selected
        assert k_flm == 1
        assert k_lc == 3

    def test_known_sigma2_recorded(self):
        ds = _orthogonal_dataset([0.001, 0.2])
        res = select(ds, PenaltySpec("aic"), sigma2=1.0)
        assert res.sigma2 == 1.0
        assert res.sigma2_source == "known"


class TestMsfdrIterative:
    def test_fixed_point_on_constructed_pvalues(self):
        # p-values sit so that the size-1 constants admit three variables
        # and the size-4 constants admit a fourth; the fixed point is 4.
        m, q = 12, 0.05
        spec = PenaltySpec("msfdr", q=q)
        a1 = step_alpha(spec, 1, m)
        a4 = step_alpha(spec, 4, m)
        assert a1 < a4
        pvals = [a1 * 0.5, a1 * 0.6, a1 * 0.7, (a1 + a4) / 2] + [0.8] * (m - 4)
        ds = _orthogonal_dataset(pvals)
        res = msfdr_iterative(ds, q, sigma2=1.0)
        # Sizes count the intercept of the centered fit: 1 -> 4 -> 5 -> ...
        assert res.k_selected == 4
        assert res.iterations >= 2
        assert res.rule == "iterative-p-to-enter"

    def test_agrees_with_trace_selection_when_monotone(self):
        # Clearly separated p-values: both computations stop identically.
        pvals = [1e-9, 1e-8, 0.4, 0.5, 0.6, 0.7]
        ds = _orthogonal_dataset(pvals)
        res_iter = msfdr_iterative(ds, 0.05, sigma2=1.0)
        res_path = select(ds, PenaltySpec("msfdr", q=0.05), sigma2=1.0)
        assert res_iter.k_selected == res_path.k_selected == 2


class TestTsfdr:
    def test_stage_two_uses_reduced_pool(self):
        # Stage 1 at q' = q/(1+q) admits r1 variables; stage 2 rescans with
        # constants i*q'/(m - r1), which are larger, and can admit more.
        m, q = 10, 0.05
        q1 = q / (1.0 + q)
        a1_stage1 = 1 * q1 / m
        # Third p-value passes only the stage-2 constant at i=3.
        a3_stage2 = 3 * q1 / (m - 2)
        a3_stage1 = 3 * q1 / m
        assert a3_stage1 < a3_stage2
        pvals = [a1_stage1 * 0.3, a1_stage1 * 0.5, (a3_stage1 + a3_stage2) / 2] + [
            0.9
        ] * (m - 3)
        ds = _orthogonal_dataset(pvals)
        res = tsfdr_select(ds, q, sigma2=1.0)
        assert res.k_selected == 3
        assert res.method.family == "tsfdr"

    def test_select_dispatches_tsfdr(self):
        ds = _orthogonal_dataset([1e-6, 0.5, 0.6])
        a = select(ds, PenaltySpec("tsfdr", q=0.05), sigma2=1.0)
        b = tsfdr_select(ds, 0.05, sigma2=1.0)
        assert a.k_selected == b.k_selected

    def test_stage_one_empty_is_final(self):
        ds = _orthogonal_dataset([0.4, 0.5, 0.6, 0.7])
        res = tsfdr_select(ds, 0.05, sigma2=1.0)
        assert res.k_selected == 0


class TestOrthogonalPvalueMachinery:
    def test_constructed_tsq_round_trip(self):
        pvals = [0.001, 0.04, 0.2, 0.6]
        ds = _orthogonal_dataset(pvals)
        path = forward_path(ds, sigma2=1.0)
        recovered = sorted(two_sided_pvalue(t) for t in path.tsq)
        assert np.allclose(recovered, sorted(pvals), rtol=1e-8)
