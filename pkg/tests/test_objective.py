import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tempfair.domains import (BackendMismatch, CapInstance, ConstraintViolation, TapInstance,
                              VrpInstance, assignment_from_loads)
from tempfair.fairness import History, UtilityVector
from tempfair.generators import gen_vrp
from tempfair.objective import (Formulation, FormulationSpec, canonical_fairness, commit_scores,
                                rolling_run, score, solve)

seeds = st.integers(0, 2 ** 32 - 1)
KINDS = ["OP", "FOP", "HFOP", "DHFOP"]
H = History.from_columns({"l1": [2, 1.5, 3, 2], "l2": [1, 1.5, 0, 1]})
# three one-unit courses and equal skills: every plan has quality 1
CAP = CapInstance.uniform([1, 1], 3, q_max=3)


def plan_of(l1, l2):
    return assignment_from_loads(CAP, {"l1": l1, "l2": l2})


def spec(kind, beta=1.0, gamma=1.0, tau=1.0, horizon=1, metric="rmm"):
    if kind in ("OP", "FOP", "HFOP"):
        gamma = tau = 1.0
    return FormulationSpec.make(kind, beta, gamma, tau, horizon, metric)


@st.composite
def cap_case(draw):
    n = draw(st.integers(2, 3))
    courses = draw(st.integers(1, 2))
    skill = draw(st.lists(st.sampled_from([0.0, 0.5, 1.0, 2.0]), min_size=n, max_size=n))
    inst = CapInstance.uniform(skill, courses, q_max=2.0)
    hist = draw(st.lists(st.lists(st.sampled_from([0.0, 0.5, 1.0, 2.0]), min_size=n, max_size=n),
                         max_size=3))
    return inst, hist


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            FormulationSpec.make("HFOP", gamma=0.5)
        with pytest.raises(ValueError):
            FormulationSpec.make("DHFOP", horizon=2)
        with pytest.raises(ValueError):
            FormulationSpec.make("FOP", beta=-1)
        with pytest.raises(ValueError):
            FormulationSpec.make("XOP")
        with pytest.raises(ValueError):
            FormulationSpec.make("MSDHFOP", horizon=0)
        assert FormulationSpec.make("msdhfop", horizon=3).kind is Formulation.MSDHFOP

    def test_op_ignores_beta_and_history(self):
        s = FormulationSpec.make("OP", beta=5)
        assert s.effective_beta == 0.0
        assert len(s.relevant_history(H)) == 0
        assert len(FormulationSpec.make("FOP", 1).relevant_history(H)) == 0
        assert len(FormulationSpec.make("HFOP", 1, window=2).relevant_history(H)) == 2

    def test_canonical_orientation(self):
        assert canonical_fairness("gap", 3.0) == -3.0
        assert canonical_fairness("minimax", 3.0) == -3.0
        assert canonical_fairness("rmm", 0.5) == 0.5


class TestScore:
    def test_running_example(self):
        half = plan_of(1.5, 1.5)
        s = score(spec("HFOP"), H, [half], CAP)
        assert s.quality_term == pytest.approx(1.0)
        assert s.fairness_term == pytest.approx(2 / 3)
        assert s.total == pytest.approx(5 / 3)
        assert score(spec("FOP"), H, [half], CAP).fairness_term == pytest.approx(1.0)

    def test_rejects_invalid_plans(self):
        with pytest.raises(ConstraintViolation):
            score(spec("HFOP"), H, [((0.4, 0.6),) * 3], CAP)
        with pytest.raises(ValueError):
            score(spec("HFOP"), H, [plan_of(1.5, 1.5)] * 2, CAP)

    def test_history_entities_must_match(self):
        other = History.from_columns({"a": [1], "b": [1]})
        with pytest.raises(ValueError):
            score(spec("HFOP"), other, [plan_of(1.5, 1.5)], CAP)

    @settings(max_examples=60, deadline=None)
    @given(cap_case(), st.sampled_from(KINDS), st.floats(0, 5), st.floats(0, 1),
           st.sampled_from(["rmm", "qmmg", "mm", "gap"]), st.data())
    def test_matches_oracle(self, case, kind, beta, gamma, metric, data):
        inst, hist = case
        sol = data.draw(st.sampled_from(list(inst.candidates())))
        sp = spec(kind, beta, gamma, 1.0, 1, metric)
        got = score(sp, History.from_rows(hist, inst.entities), [sol], inst).total
        want = oracles.objective(kind, beta, metric, hist, [inst.quality(sol)],
                                 [list(inst.utility_values(sol))], sp.disc.gamma)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


class TestSolve:
    def test_compare_table(self):
        res = solve(spec("HFOP", 1.0), H, CAP, "enumerate")
        assert tuple(res.per_step_utilities[0].values) == (0, 3)
        assert res.total == pytest.approx(1 + 13 / 15)
        fop = solve(spec("FOP", 1.0), H, CAP, "enumerate")
        assert tuple(fop.per_step_utilities[0].values) == (1.5, 1.5)

    @settings(max_examples=60, deadline=None)
    @given(cap_case(), st.sampled_from(KINDS), st.floats(0, 5), st.floats(0, 1),
           st.sampled_from(["rmm", "qmmg", "mm", "gap", "minimax"]))
    def test_enumerate_is_optimal(self, case, kind, beta, gamma, metric):
        inst, hist = case
        sp = spec(kind, beta, gamma, 1.0, 1, metric)
        res = solve(sp, History.from_rows(hist, inst.entities), inst, "enumerate")
        want = oracles.best_plan_value(kind, beta, metric, hist, [inst], sp.disc.gamma)
        assert res.total == pytest.approx(want, rel=1e-9, abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(cap_case(), st.integers(2, 3), st.floats(0, 5), st.floats(0, 1), st.floats(0, 1))
    def test_multi_step_is_optimal(self, case, horizon, beta, gamma, tau):
        inst, hist = case
        sp = spec("MSDHFOP", beta, gamma, tau, horizon)
        res = solve(sp, History.from_rows(hist, inst.entities), inst, "enumerate")
        want = oracles.best_plan_value("MSDHFOP", beta, "rmm", hist, [inst] * horizon, gamma, tau)
        assert len(res.plan) == horizon
        assert res.total == pytest.approx(want, rel=1e-9, abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(cap_case(), st.floats(0, 5), st.floats(0, 1))
    def test_horizon_one_equals_dhfop(self, case, beta, gamma):
        inst, hist = case
        h = History.from_rows(hist, inst.entities)
        a = solve(spec("MSDHFOP", beta, gamma), h, inst, "enumerate")
        b = solve(spec("DHFOP", beta, gamma), h, inst, "enumerate")
        assert a.total == pytest.approx(b.total)
        c = solve(spec("DHFOP", beta, 1.0), h, inst, "enumerate")
        d = solve(spec("HFOP", beta), h, inst, "enumerate")
        assert c.total == pytest.approx(d.total)

    @settings(max_examples=8, deadline=None)
    @given(seeds, st.sampled_from(["FOP", "HFOP"]), st.sampled_from(["gap", "minimax"]))
    def test_milp_matches_enumerate_on_vrp(self, seed, kind, metric):
        inst = gen_vrp(5, 4, seed, 2)
        hist = History.from_rows([[float(v) for v in np.random.default_rng(seed).integers(0, 20, 2)]],
                                 inst.entities)
        sp = spec(kind, 2.0, metric=metric)
        a = solve(sp, hist, inst, "milp")
        b = solve(sp, hist, inst, "enumerate")
        assert a.total == pytest.approx(b.total, rel=1e-7, abs=1e-7)

    @settings(max_examples=8, deadline=None)
    @given(seeds, st.floats(0, 3), st.floats(0.1, 1))
    def test_milp_matches_enumerate_on_tap_multi_step(self, seed, beta, tau):
        rng = np.random.default_rng(seed)
        insts = [TapInstance.from_matrix(rng.integers(0, 30, (4, 4))) for _ in range(2)]
        rows = [rng.integers(0, 50, 4).tolist()]
        hist = History.from_rows(rows, insts[0].entities)
        sp = spec("MSDHFOP", beta, 0.8, tau, 2, "minimax")
        a = solve(sp, hist, insts, "milp")
        b = solve(sp, hist, insts, "enumerate")
        want = oracles.best_plan_value("MSDHFOP", beta, "minimax", rows,
                                       insts, 0.8, tau)
        assert a.total == pytest.approx(want, rel=1e-7, abs=1e-7)
        assert b.total == pytest.approx(want, rel=1e-7, abs=1e-7)

    def test_auto_uses_exact_search_where_available(self):
        tap = TapInstance.from_matrix(np.arange(16).reshape(4, 4))
        assert solve(spec("FOP", 1.0, metric="minimax"), None, tap).diagnostics["backend"] == "exact"
        assert solve(spec("OP"), None, CAP).diagnostics["backend"] == "enumerate"

    def test_errors(self):
        with pytest.raises(BackendMismatch):
            solve(spec("OP"), None, CAP, "gurobi")
        with pytest.raises(BackendMismatch):
            solve(spec("OP"), None, CAP, "milp")
        with pytest.raises(ValueError):
            solve(spec("MSDHFOP", horizon=3), None, [CAP, CAP])
        vrp = VrpInstance.with_vehicles([(0, 0), (1, 0), (0, 1)], 0, 2)
        with pytest.raises(ValueError):
            solve(spec("MSDHFOP", horizon=2), None, [CAP, vrp])


class TestRolling:
    def test_appends_committed_utilities(self):
        out = rolling_run(spec("HFOP", 1.0), H, [CAP, CAP, CAP])
        assert [tuple(s.per_step_utilities[0].values) for s in out] == [(0, 3), (0.5, 2.5), (1.5, 1.5)]
        # each step sees the previous commitments
        hist = H
        for s in out:
            again = solve(spec("HFOP", 1.0), hist, CAP)
            assert again.total == pytest.approx(s.total)
            hist = hist.appended(s.per_step_utilities[0])

    def test_msdhfop_shrinks_horizon_at_the_end(self):
        out = rolling_run(spec("MSDHFOP", 1.0, 1.0, 1.0, 3), H, [CAP] * 4, "enumerate")
        assert [len(s.plan) for s in out] == [3, 3, 2, 1]

    def test_commit_scores(self):
        out = rolling_run(spec("HFOP", 1.0), H, [CAP, CAP])
        again = commit_scores(spec("HFOP", 1.0), H, [CAP, CAP], [s.plan[0] for s in out])
        assert [a.total for a in again] == pytest.approx([s.total for s in out])

    def test_tie_break_is_deterministic(self):
        a = solve(spec("FOP", 0.0), None, CapInstance.uniform([1, 1], 1), "enumerate")
        b = solve(spec("FOP", 0.0), None, CapInstance.uniform([1, 1], 1), "enumerate")
        assert a.plan == b.plan


def test_utility_vector_entities_follow_instance():
    res = solve(spec("HFOP", 1.0), H, CAP)
    assert res.per_step_utilities[0].entities == ("l1", "l2")
    assert isinstance(res.per_step_utilities[0], UtilityVector)
