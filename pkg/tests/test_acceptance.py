"""Acceptance criteria 1-8, each at its stated tolerance and time budget.

The terminal summary (see conftest.py) prints one PASS/FAIL line per
criterion.
"""

import csv
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

import oracles
from helpers import binary_model
from tempfair import experiments
from tempfair.domains import TapInstance
from tempfair.generators import gen_vrp
from tempfair.milp import Status, branch_and_bound
from tempfair.objective import FormulationSpec, solve


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def by(rows, key):
    return {r[key]: r for r in rows}


# -- 1. exact-value tables ------------------------------------------------------------

@pytest.mark.criterion(1)
def test_compare_f_and_fh_table():
    res, secs = timed(experiments.compare_f_fh)
    single = [r for r in res.rows if r["table"] == "single"]
    want = [(1.00, 0.67), (0.67, 0.73), (0.00, 0.87)]
    assert [r["x_t"] for r in single] == ["x_(1.5,1.5)", "x_(1,2)", "x_(0,3)"]
    for r, (F, FH) in zip(single, want):
        assert r["F"] == pytest.approx(F, abs=5e-3)
        assert r["F_H"] == pytest.approx(FH, abs=5e-3)
    assert secs < 1.0


@pytest.mark.criterion(1)
def test_planning_multiple_steps_table():
    res, secs = timed(experiments.compare_f_fh)
    two = [r["F_H"] for r in res.rows if r["table"] == "two-step"]
    assert two == pytest.approx([0.94, 1.00, 0.88], abs=5e-3)
    assert secs < 1.0


@pytest.mark.criterion(1)
def test_multiple_steps_benefit_table():
    res, secs = timed(experiments.forecast)
    s = by(res.summary, "formulation")
    assert s["HFOP"]["sum_Q"] == pytest.approx(10, abs=5e-3)
    assert s["HFOP"]["F"] == pytest.approx(0.33, abs=5e-3)
    assert s["MSDHFOP"]["sum_Q"] == pytest.approx(12, abs=5e-3)
    assert s["MSDHFOP"]["F"] == pytest.approx(1.0, abs=5e-3)
    assert secs < 1.0


# -- 2. trajectories ------------------------------------------------------------------

@pytest.mark.criterion(2)
def test_fop_balanced_trajectory_and_hfop_catch_up():
    res, secs = timed(experiments.fop_vs_hfop, steps=101)
    fop = [r for r in res.rows if r["series"] == "FOP"]
    assert len(fop) == 101
    for r in fop:
        assert (r["l1"], r["l2"]) == (1.5, 1.5)
        assert r["F_H"] == pytest.approx(1 - 5 / (3 * r["step"] + 15), abs=1e-6)
    hfop = [r for r in res.rows if r["series"] == "HFOP"]
    assert (hfop[0]["l1"], hfop[0]["l2"]) == (0, 3)
    assert (hfop[1]["l1"], hfop[1]["l2"]) == (0.5, 2.5)
    reached = by(res.summary, "formulation")["HFOP"]["first_step_F_H_1"]
    assert reached != "" and reached <= 2
    assert secs < 1.0


@pytest.mark.criterion(2)
@pytest.mark.parametrize("gamma, want", [(0.25, 2), (0.5, 5), (0.9, 26)])
def test_gamma_sweep_first_step(gamma, want):
    res, secs = timed(experiments.gamma_sweep, gammas=(gamma,))
    for r in res.rows:
        assert r["value"] == pytest.approx(r["closed_form"], abs=1e-6)
    assert res.summary[0]["first_step_ge_0.99"] == want
    assert secs < 1.0


# -- 3. beta sweep -------------------------------------------------------------------

@pytest.mark.criterion(3)
def test_beta_sweep_dynamics():
    res, secs = timed(experiments.beta_sweep)
    s = res.summary
    assert [r["beta"] for r in s] == [0.125, 0.25, 0.75, 2.0]
    qs = [r["mean_Q"] for r in s]
    fs = [r["mean_F"] for r in s]
    assert all(a > b for a, b in zip(qs, qs[1:]))
    assert all(a < b for a, b in zip(fs, fs[1:]))
    b2 = [r for r in res.rows if r["beta"] == 2.0]
    assert len(b2) == 10
    assert all(r["F"] == pytest.approx(-0.0625) for r in b2)
    first = next(r for r in res.rows if r["beta"] == 0.125 and r["step"] == 0)
    assert (first["Q"], first["F"]) == (pytest.approx(1.0), pytest.approx(-1.0))
    assert secs < 10.0


# -- 4. solver correctness -------------------------------------------------------------

@pytest.fixture(scope="module")
def solver_budget():
    return {"seconds": 0.0}


@pytest.mark.criterion(4)
def test_branch_and_bound_matches_enumeration(solver_budget):
    start = time.perf_counter()
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 13)), int(rng.integers(1, 6))
        c, A, b = oracles.random_binary_program(rng, n, m)
        res = branch_and_bound(binary_model(c, A, b))
        assert res.status is Status.OPTIMAL
        assert res.objective == pytest.approx(oracles.binary_brute(c, A, b), abs=1e-7), seed
    solver_budget["seconds"] += time.perf_counter() - start


@pytest.mark.criterion(4)
def test_vrp_ip_matches_route_enumeration(solver_budget):
    start = time.perf_counter()
    op = FormulationSpec.make("OP")
    for seed in range(100):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 3))
        n_cust = int(rng.integers(k, 8))  # at most 8 points with the depot
        inst = gen_vrp(10, n_cust, seed, k)
        res = solve(op, None, inst, "milp")
        inst.check(res.plan[0])
        assert -res.quality_term == pytest.approx(oracles.vrp_brute(inst.coords, 0, k),
                                                  abs=1e-7), seed
    solver_budget["seconds"] += time.perf_counter() - start


@pytest.mark.criterion(4)
def test_tap_ip_matches_hungarian_oracle(solver_budget):
    start = time.perf_counter()
    op = FormulationSpec.make("OP")
    for seed in range(100):
        C = np.random.default_rng(seed).integers(0, 50, (8, 8)).astype(float)
        res = solve(op, None, TapInstance.from_matrix(C), "milp")
        r, c = linear_sum_assignment(C)
        assert -res.quality_term == pytest.approx(C[r, c].sum(), abs=1e-7), seed
    solver_budget["seconds"] += time.perf_counter() - start
    assert solver_budget["seconds"] < 60.0


# -- 5 and 8. vehicle routing -----------------------------------------------------------

@pytest.fixture(scope="module")
def vrp_result():
    return timed(experiments.vrp, 0)


@pytest.mark.criterion(5)
def test_vrp_directions(vrp_result):
    res, secs = vrp_result
    s = by(res.summary, "formulation")
    vehicles = ("V1", "V2", "V3", "V4")
    assert s["OP"]["total"] <= s["FOP"]["total"] + 1e-9
    assert s["FOP"]["gap"] < s["OP"]["gap"]
    hist = np.array([s["history"][v] for v in vehicles])
    hfop = np.array([s["HFOP"][v] for v in vehicles])
    # the vehicle with the most past distance drives least now, and so on
    assert list(np.argsort(-hfop, kind="stable")) == list(np.argsort(hist, kind="stable"))
    assert all(a > b for a, b in zip(hfop[np.argsort(hist)], hfop[np.argsort(hist)][1:]))
    assert secs < 600.0


@pytest.mark.criterion(8)
def test_vrp_timing(vrp_result, tmp_path):
    res, secs = vrp_result
    t = by(res.timings, "formulation")
    assert t["FOP"]["seconds"] <= 10 * t["OP"]["seconds"]
    assert t["HFOP"]["seconds"] <= 10 * t["OP"]["seconds"]
    paths = experiments.write_result(res, tmp_path)
    timing_csv = next(p for p in paths if p.name.endswith("_timing.csv"))
    with open(timing_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["formulation"] for r in rows} == {"OP", "FOP", "HFOP"}
    assert all(float(r["seconds"]) > 0 for r in rows)
    assert secs < 1200.0


# -- 6. task assignment ----------------------------------------------------------------

@pytest.mark.criterion(6)
def test_tap_directions():
    res, secs = timed(experiments.tap, 0)
    s = by(res.summary, "formulation")
    assert s["OP"]["max_cost_30_mean"] > s["FOP"]["max_cost_30_mean"]
    assert s["HFOP"]["max_cost_30_mean"] == 6.0
    assert s["HFOP"]["max_cost_30_std"] == 0.0
    assert s["HFOP"]["cost_W_mean"] < s["FOP"]["cost_W_mean"] < s["OP"]["cost_W_mean"]
    assert s["MSDHFOP"]["cost_C_first3_mean"] < s["OP"]["cost_C_first3_mean"]
    assert secs < 900.0


# -- 7. nurse scheduling ------------------------------------------------------------------

@pytest.mark.criterion(7)
def test_nsp_history_experiment():
    res, secs = timed(experiments.nsp, 0)
    last = {r["history"]: r for r in res.rows if r["week"] == -1}
    assert last["H1"]["F_H"] == pytest.approx(last["H2"]["F_H"], abs=1e-12)
    assert last["H1"]["F_H_gamma"] > last["H2"]["F_H_gamma"]
    s = {(r["formulation"], r["history"]): r for r in res.summary}
    assert s["DHFOP", "H1"]["F"] >= s["DHFOP", "H2"]["F"]
    assert s["HFOP", "H1"]["schedule"] == s["HFOP", "H2"]["schedule"]
    assert secs < 60.0
