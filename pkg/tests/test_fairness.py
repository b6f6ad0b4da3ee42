import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tempfair.fairness import (DiscountSpec, History, MetricKind, Orientation, StructuralError,
                               UtilityVector, discounted_totals, evaluate, evaluate_temporal,
                               max_min_gap, maximin_ratio, maximin_ratio_temporal, minimax_cost,
                               minimax_cost_temporal, qmmg, qmmg_temporal, rmm,
                               rmm_balanced_trajectory, rmm_temporal)

H = History.from_columns({"l1": [2, 1.5, 3, 2], "l2": [1, 1.5, 0, 1]})


def x(a, b):
    return UtilityVector(("l1", "l2"), (a, b))


values = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=6)
METRICS = ["rmm", "qmmg", "mm", "gap", "minimax"]


@st.composite
def history_and_plan(draw, max_steps=5):
    n = draw(st.integers(1, 4))
    row = st.lists(st.floats(0, 50, allow_nan=False), min_size=n, max_size=n)
    hist = draw(st.lists(row, max_size=max_steps))
    plan = draw(st.lists(row, min_size=1, max_size=3))
    return hist, plan


class TestUtilityVector:
    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValueError):
            UtilityVector.of([1, -1])
        with pytest.raises(ValueError):
            UtilityVector.of([math.inf])
        with pytest.raises(ValueError):
            UtilityVector.of([math.nan])

    def test_rejects_duplicates_and_length_mismatch(self):
        with pytest.raises(ValueError):
            UtilityVector(("a", "a"), (1, 2))
        with pytest.raises(ValueError):
            UtilityVector(("a",), (1, 2))

    def test_add_requires_same_entities(self):
        assert (x(1, 2) + x(3, 4)).values == (4, 6)
        with pytest.raises(StructuralError):
            x(1, 2) + UtilityVector(("l2", "l1"), (1, 2))


class TestHistory:
    def test_from_columns_matches_rows(self):
        rows = History.from_rows([(2, 1), (1.5, 1.5), (3, 0), (2, 1)], ("l1", "l2"))
        assert rows == H

    def test_window(self):
        assert len(H.window(0)) == 0
        assert H.window(2).steps == H.steps[2:]
        assert H.window(10) == H
        with pytest.raises(ValueError):
            H.window(-1)

    def test_totals_and_reversed(self):
        assert H.totals().values == (8.5, 3.5)
        assert H.reversed().steps == H.steps[::-1]
        assert History().totals() is None

    def test_mixed_entities_rejected(self):
        with pytest.raises(StructuralError):
            History((x(1, 1), UtilityVector(("a", "b"), (1, 1))))


class TestDiscountedTotals:
    def test_running_example(self):
        assert discounted_totals(H, [x(1.5, 1.5)]).values == (10, 5)

    def test_gamma_zero_erases_history(self):
        assert discounted_totals(H, [x(0, 3)], DiscountSpec(0.0, 1.0)).values == (0, 3)

    def test_gamma_point_nine(self):
        u = discounted_totals(H, [x(1.5, 1.5)], DiscountSpec(0.9, 1.0))
        assert u.values[0] == pytest.approx(1.5 + 0.9 * 2 + 0.81 * 3 + 0.729 * 1.5 + 0.6561 * 2)
        assert u.values[1] == pytest.approx(1.5 + 0.9 * 1 + 0.729 * 1.5 + 0.6561 * 1)

    def test_errors(self):
        with pytest.raises(ValueError):
            discounted_totals(H, [])
        with pytest.raises(StructuralError):
            discounted_totals(H, [UtilityVector(("a", "b"), (1, 1))])
        with pytest.raises(ValueError):
            DiscountSpec(1.5, 1.0)

    @given(history_and_plan(), st.floats(0, 1), st.floats(0, 1))
    def test_matches_oracle(self, hp, gamma, tau):
        hist, plan = hp
        got = discounted_totals(History.from_rows(hist), [UtilityVector.of(r) for r in plan],
                                DiscountSpec(gamma, tau))
        want = oracles.discounted(hist, plan, gamma, tau)
        assert np.allclose(got.values, want, rtol=1e-12, atol=1e-9)


class TestPlainMetrics:
    @pytest.mark.parametrize("u, want", [((1.5, 1.5), 1.0), ((0, 3), 0.0), ((1, 2), 2 / 3)])
    def test_rmm(self, u, want):
        assert rmm(x(*u)) == pytest.approx(want)

    def test_degenerate_zero_vectors(self):
        z = UtilityVector.of([0, 0])
        assert rmm(z) == 1.0
        assert maximin_ratio(z) == 1.0
        assert qmmg(z) == 0.0

    @pytest.mark.parametrize("u, want", [((2, 0, 0), -1.0), ((1, 1, 1), 0.0), ((1, 0.5, 1), -0.0625)])
    def test_qmmg(self, u, want):
        assert qmmg(UtilityVector.of(u)) == pytest.approx(want)

    @pytest.mark.parametrize("u, want", [((2, 6), 1 / 3), ((4, 4), 1.0), ((0, 5), 0.0)])
    def test_maximin_ratio(self, u, want):
        assert maximin_ratio(UtilityVector.of(u)) == pytest.approx(want)

    def test_gap_and_minimax(self):
        assert max_min_gap(UtilityVector.of([26.6, 28.3, 28.6, 28.6])) == pytest.approx(2.0)
        assert max_min_gap(UtilityVector.of([4.5, 6.3, 13.8, 49.8])) == pytest.approx(45.3)
        assert minimax_cost(UtilityVector.of([5, 20, 30, 20])) == 30
        hist = History.from_rows([(180, 30, 120)])
        assert minimax_cost_temporal(hist, [UtilityVector.of([5, 20, 30])]) == 185

    def test_orientation(self):
        assert MetricKind.MAX_MIN_GAP.orientation is Orientation.LOWER_IS_FAIRER
        assert MetricKind.MINIMAX_COST.orientation is Orientation.LOWER_IS_FAIRER
        assert MetricKind.RELATIVE_MAX_MIN.orientation is Orientation.HIGHER_IS_FAIRER
        with pytest.raises(ValueError):
            MetricKind.parse("nope")

    @given(st.sampled_from(METRICS), values)
    def test_matches_oracle(self, name, vals):
        assert evaluate(name, UtilityVector.of(vals)) == pytest.approx(
            oracles.metric(name, vals), rel=1e-12, abs=1e-12)

    @given(st.sampled_from(["rmm", "mm"]), values, st.floats(0.01, 100))
    def test_scale_invariance(self, name, vals, c):
        u = UtilityVector.of(vals)
        assert evaluate(name, u.with_values(np.multiply(vals, c))) == pytest.approx(
            evaluate(name, u), abs=1e-9)

    @given(st.sampled_from(METRICS), values, st.randoms())
    def test_permutation_invariance(self, name, vals, rnd):
        u = UtilityVector.of(vals)
        order = list(range(len(vals)))
        rnd.shuffle(order)
        assert evaluate(name, u.permuted(order)) == pytest.approx(evaluate(name, u))

    @given(values)
    def test_ranges(self, vals):
        u = UtilityVector.of(vals)
        assert 0.0 <= rmm(u) <= 1.0 + 1e-12
        assert 0.0 <= maximin_ratio(u) <= 1.0
        assert qmmg(u) <= 0.0
        assert max_min_gap(u) >= 0.0


class TestTemporalMetrics:
    def test_compare_table(self):
        assert rmm_temporal(H, [x(1.5, 1.5)]) == pytest.approx(2 / 3)
        assert rmm_temporal(H, [x(1, 2)]) == pytest.approx(11 / 15)
        assert rmm_temporal(H, [x(0, 3)]) == pytest.approx(13 / 15)

    def test_two_step_plans(self):
        assert rmm_temporal(H, [x(0, 3), x(0, 3)]) == pytest.approx(17 / 18)
        assert rmm_temporal(H, [x(0.5, 2.5), x(0, 3)]) == pytest.approx(1.0)
        assert rmm_temporal(H, [x(1.5, 1.5), x(0, 3)]) == pytest.approx(16 / 18)

    def test_qmmg_temporal(self):
        assert qmmg_temporal(History(), [UtilityVector.of([1, 1, 0])]) == -0.25
        hist = History.from_rows([(2, 0, 0), (2, 0, 0)])
        assert qmmg_temporal(hist, [UtilityVector.of([0, 0, 0])]) == -4.0

    @given(st.sampled_from(METRICS), history_and_plan(), st.floats(0, 1), st.floats(0, 1))
    def test_is_metric_of_totals(self, name, hp, gamma, tau):
        hist, plan = hp
        got = evaluate_temporal(name, History.from_rows(hist),
                                [UtilityVector.of(r) for r in plan], DiscountSpec(gamma, tau))
        want = oracles.metric(name, oracles.discounted(hist, plan, gamma, tau))
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)

    @given(st.sampled_from(METRICS), values)
    def test_empty_history_reduces_to_plain(self, name, vals):
        u = UtilityVector.of(vals)
        assert evaluate_temporal(name, History(), [u], DiscountSpec(0.3, 0.7)) == evaluate(name, u)

    @given(st.sampled_from(METRICS), history_and_plan())
    def test_undiscounted_reversal_invariance(self, name, hp):
        hist, plan = hp
        h = History.from_rows(hist)
        p = [UtilityVector.of(r) for r in plan]
        assert evaluate_temporal(name, h, p) == pytest.approx(evaluate_temporal(name, h.reversed(), p))

    def test_discounted_prefers_recent_fairness(self):
        from tempfair.generators import gen_nsp_histories
        h1, h2 = gen_nsp_histories()
        past1, cur1 = h1[:-1], [h1[-1]]
        past2, cur2 = h2[:-1], [h2[-1]]
        assert maximin_ratio_temporal(past1, cur1) == pytest.approx(maximin_ratio_temporal(past2, cur2))
        d = DiscountSpec(0.65, 1.0)
        assert maximin_ratio_temporal(past1, cur1, d) > maximin_ratio_temporal(past2, cur2, d)


class TestBalancedTrajectory:
    @pytest.mark.parametrize("gamma", [0.25, 0.5, 0.9, 1.0])
    def test_matches_direct_evaluation(self, gamma):
        closed = rmm_balanced_trajectory(H, 3.0, gamma, 60)
        hist = H
        for k in range(60):
            direct = rmm_temporal(hist, [x(1.5, 1.5)], DiscountSpec(gamma, 1.0))
            assert closed[k] == pytest.approx(direct, abs=1e-12)
            hist = hist.appended(x(1.5, 1.5))

    def test_undiscounted_value_after_ten_steps(self):
        assert rmm_balanced_trajectory(H, 3.0, 1.0, 11)[10] == pytest.approx(1 - 5 / 45)

    def test_errors(self):
        with pytest.raises(ValueError):
            rmm_balanced_trajectory(H, 0.0, 0.5, 3)
        with pytest.raises(ValueError):
            rmm_balanced_trajectory(History.from_rows([(1, 1, 1)]), 3.0, 0.5, 3)
