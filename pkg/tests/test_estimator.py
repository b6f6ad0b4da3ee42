import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tempfair import History, TemporalFairOptimizer, UtilityVector
from tempfair.domains import CapInstance

H = [[2, 1], [1.5, 1.5], [3, 0], [2, 1]]
CAP = CapInstance.uniform([1, 1], 3, q_max=3)


def loads(plan):
    return tuple(CAP.utility_values(plan[0]))


class TestEstimator:
    def test_params_round_trip(self):
        est = TemporalFairOptimizer(formulation="DHFOP", beta=2.0, gamma=0.5)
        assert clone(est).get_params() == est.get_params()
        est.set_params(beta=3.0)
        assert est.beta == 3.0

    def test_predict_matches_running_example(self):
        est = TemporalFairOptimizer("HFOP", beta=1.0).fit(H)
        assert loads(est.predict(CAP)) == (0, 3)
        assert est.score(CAP) == pytest.approx(1 + 13 / 15)
        fop = TemporalFairOptimizer("FOP", beta=1.0).fit(H)
        assert loads(fop.predict(CAP)) == (1.5, 1.5)

    def test_named_history(self):
        hist = History.from_rows(H, ("l1", "l2"))
        est = TemporalFairOptimizer(beta=1.0).fit(hist)
        assert est.entities_ == ("l1", "l2")
        with pytest.raises(ValueError):
            est.predict(CapInstance.uniform([1, 1], 3, lecturers=("a", "b")))

    def test_partial_fit_and_run(self):
        est = TemporalFairOptimizer(beta=1.0).fit(H)
        est.partial_fit([0, 3])
        assert len(est.history_) == 5
        est2 = TemporalFairOptimizer(beta=1.0).fit(H)
        out = est2.run([CAP, CAP])
        assert len(est2.history_) == 6
        assert [tuple(s.per_step_utilities[0].values) for s in out] == [(0, 3), (0.5, 2.5)]

    def test_validation(self):
        with pytest.raises(NotFittedError):
            TemporalFairOptimizer().predict(CAP)
        with pytest.raises(ValueError):
            TemporalFairOptimizer(beta=-1).fit(H)
        with pytest.raises(ValueError):
            TemporalFairOptimizer(gamma=2).fit(H)
        with pytest.raises(ValueError):
            TemporalFairOptimizer(horizon=0).fit(H)
        with pytest.raises(ValueError):
            TemporalFairOptimizer().fit([[1, -1]])
        with pytest.raises(ValueError):
            TemporalFairOptimizer().fit([[1, np.nan]])
        with pytest.raises(ValueError):
            TemporalFairOptimizer().fit([[1, 2, 3]]).predict(CAP)

    def test_utility_vectors_accepted(self):
        hist = [UtilityVector(("l1", "l2"), tuple(r)) for r in H]
        est = TemporalFairOptimizer(beta=1.0).fit(hist)
        assert loads(est.predict(CAP)) == (0, 3)

    def test_multi_step(self):
        away = CapInstance.uniform([1, 1], 3, q_max=3).with_unavailable({"l1"})
        est = TemporalFairOptimizer("MSDHFOP", beta=1.0, horizon=2).fit(H)
        plan = est.predict([CAP, away])
        assert len(plan) == 2
        assert loads(plan) == (0.5, 2.5)
