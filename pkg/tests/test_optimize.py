import math

import numpy as np
import pytest

from gkpcavity.optimize import (
    SearchSpace,
    evaluate_candidate,
    optimize_point,
    point_record,
    sweep,
)


class TestSearchSpace:
    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            SearchSpace(eta_range=(0.0, 0.9))
        with pytest.raises(ValueError):
            SearchSpace(r_range=(0.5, 2.5))
        with pytest.raises(ValueError):
            SearchSpace(scale_range=(1.2, 1.1))


class TestEvaluateCandidate:
    params = dict(eta=0.95, r=1.0, scale=1.0, atom_a=1 / math.sqrt(2), p_displacement=0.3)

    def test_cavity_scores(self):
        ev = evaluate_candidate(500.0, "cavity", 1, self.params)
        assert ev.error is None
        assert ev.min_db == min(ev.db_x, ev.db_p)
        assert 0 < ev.success_probability <= 1

    def test_failure_is_scored_not_raised(self):
        bad = dict(self.params, r=5.0)  # outside any legal squeezing
        ev = evaluate_candidate(500.0, "cavity", 1, bad)
        assert ev.error is not None
        assert ev.min_db < -1e8

    def test_unknown_protocol(self):
        with pytest.raises(ValueError):
            evaluate_candidate(100.0, "teleport", 1, self.params)


class TestOptimizePoint:
    def test_budget_floor(self):
        with pytest.raises(ValueError):
            optimize_point(100.0, "cavity", 1, budget=10)

    def test_degenerate_space_single_evaluation(self):
        space = SearchSpace(
            eta_range=(0.95, 0.95), r_range=(1.0, 1.0),
            optimize_scale=False, optimize_atom=False,
        )
        point = optimize_point(200.0, "cavity", 1, space, budget=50, seed=0)
        assert point.n_evaluations == 1
        assert point.best.params["eta"] == pytest.approx(0.95)
        assert point.best.params["r"] == pytest.approx(1.0)

    def test_best_dominates_log(self):
        point = optimize_point(
            200.0, "cavity", 1, SearchSpace(), budget=60, seed=3, keep_log=True
        )
        best_key = point.best.key()
        assert all(best_key >= ev.key() for ev in point.evaluations)
        assert point.n_evaluations <= 60

    def test_deterministic_given_seed(self):
        kw = dict(space=SearchSpace(), budget=55, seed=7)
        one = optimize_point(150.0, "cavity", 1, **kw)
        two = optimize_point(150.0, "cavity", 1, **kw)
        assert one.best.params == two.best.params
        assert one.best.min_db == two.best.min_db

    def test_vacuum_protocol_dimension(self):
        point = optimize_point(200.0, "vacuum", 1, SearchSpace(), budget=60, seed=2)
        assert point.best.min_db > 0
        assert "p_displacement" in point.best.params

    @pytest.mark.slow
    def test_high_c0_cavity_bounded_by_peak_count(self):
        # four peaks cap the momentum squeezing at 10.4 dB
        space = SearchSpace(optimize_scale=True)
        point = optimize_point(1e7, "cavity", 2, space, budget=150, seed=5)
        assert point.best.min_db == pytest.approx(10.4, abs=0.15)
        assert point.best.params["scale"] == pytest.approx(1.0, abs=0.02)

    @pytest.mark.slow
    def test_optimal_input_squeezing_interior(self):
        space = SearchSpace(optimize_scale=False)
        point = optimize_point(200.0, "cavity", 1, space, budget=120, seed=4)
        best = point.best
        lo = evaluate_candidate(200.0, "cavity", 1, dict(best.params, r=0.0))
        hi = evaluate_candidate(200.0, "cavity", 1, dict(best.params, r=2.0))
        assert best.min_db > lo.min_db
        assert best.min_db > hi.min_db

    @pytest.mark.slow
    def test_optimal_scale_compensates_loss(self):
        # finite cooperativity wants slightly oversized displacements
        space = SearchSpace(optimize_scale=True)
        for c0, lo, hi in [(200.0, 1.0, 1.12), (2000.0, 1.0, 1.06), (1e7, 0.98, 1.02)]:
            point = optimize_point(c0, "cavity", 1, space, budget=150, seed=6)
            assert lo - 0.01 <= point.best.params["scale"] <= hi

    @pytest.mark.slow
    def test_cavity_10db_crossing_location(self):
        # three interactions reach 10 dB near C = 110, eta = 0.997
        space = SearchSpace(optimize_scale=True, optimize_atom=True)
        point = optimize_point(36700.0, "cavity", 3, space, budget=220, seed=8)
        assert point.best.min_db == pytest.approx(10.0, abs=0.4)
        assert point.cooperativity == pytest.approx(110.0, rel=0.35)
        assert point.eta == pytest.approx(0.997, abs=0.002)


class TestSweep:
    def test_empty_c0_list(self):
        result = sweep([], "cavity", [1], budget=50)
        assert result.points == []

    @pytest.mark.slow
    def test_min_db_nondecreasing_in_c0(self):
        c0s = [50.0, 150.0, 450.0, 1300.0, 4000.0]
        result = sweep(c0s, "cavity", [1], SearchSpace(), budget=90, seed=1)
        best = [result.best_for(c0).best.min_db for c0 in c0s]
        assert all(b >= a - 0.02 for a, b in zip(best, best[1:]))

    def test_partial_failure_recorded(self):
        # an impossible space fails per-point but the sweep continues
        space = SearchSpace(r_range=(2.0, 2.0), eta_range=(0.5, 0.5))
        result = sweep([100.0], "cavity", [3], space, budget=50, seed=0, dim_cap=64)
        assert len(result.points) == 1
        assert result.points[0].best.error is not None
        with pytest.raises(KeyError):
            result.best_for(100.0)

    def test_point_record_columns(self):
        point = optimize_point(
            150.0, "cavity", 1,
            SearchSpace(eta_range=(0.95, 0.95), r_range=(0.8, 0.8)), budget=50,
        )
        rec = point_record(point)
        assert rec["C0"] == 150.0
        assert rec["C"] == pytest.approx(150.0 * 0.05)
        assert rec["min_dB"] == point.best.min_db
