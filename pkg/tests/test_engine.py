"""Cycle application, traces, diagnostics, rate fits, verdicts."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cycproj import (
    PlanePoint,
    Trace,
    build_plane_two_lines,
    build_plane_two_sets,
    build_tripod_counterexample,
    cycle_apply,
    iterate,
    rate_fit,
    two_set_diagnostics,
    verdict,
)

DELTA = math.sqrt(2.0) / 4.0


@pytest.fixture(scope="module")
def tripod():
    return build_tripod_counterexample(3)


class TestCycleApply:
    def test_endpoint_travels_the_cycle(self, tripod):
        # the endpoint visits the third segment, then the second, then comes
        # back to the opposite endpoint of the first
        space = tripod.space
        e = tripod.start("endpoint")
        final, mids = cycle_apply(space, tripod.sets, e)
        assert len(mids) == 3
        after_c3, after_c2, after_c1 = mids
        assert after_c3.left.leg == 2 and after_c3.right.leg == 2
        assert after_c3.left.offset == pytest.approx(0.5 - DELTA, abs=1e-12)
        assert after_c3.right.offset == pytest.approx(0.5 + DELTA, abs=1e-12)
        assert after_c2.left.leg == 1 and after_c2.right.leg == 1
        assert after_c2.left.offset == pytest.approx(0.5 + DELTA, abs=1e-12)
        assert after_c2.right.offset == pytest.approx(0.5 - DELTA, abs=1e-12)
        assert final is after_c1
        assert final.left.offset == pytest.approx(0.5 - DELTA, abs=1e-12)
        assert final.right.offset == pytest.approx(0.5 + DELTA, abs=1e-12)
        assert space.distance(e, final) == pytest.approx(1.0, abs=1e-12)

    def test_midpoint_is_fixed(self, tripod):
        mid = tripod.start("midpoint")
        final, _ = cycle_apply(tripod.space, tripod.sets, mid)
        assert tripod.space.distance(mid, final) <= 1e-15

    def test_single_set_degenerates(self, tripod):
        from cycproj import project

        x = tripod.start("center")
        final, mids = cycle_apply(tripod.space, tripod.sets[:1], x)
        assert len(mids) == 1
        direct = project(tripod.space, tripod.sets[0], x)
        assert tripod.space.distance(final, direct.point) == 0.0

    def test_empty_sets_rejected(self, tripod):
        with pytest.raises(ValueError):
            cycle_apply(tripod.space, (), tripod.start("center"))


class TestIterate:
    def test_tripod_steps_stay_one(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 100)
        assert np.abs(trace.r - 1.0).max() <= 1e-9

    def test_center_start_settles_immediately(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("center"), 10)
        assert trace.r[0] == pytest.approx(math.sqrt(0.5), abs=1e-12)
        assert np.abs(trace.r[1:]).max() <= 1e-15

    def test_two_lines_ratio(self):
        scenario = build_plane_two_lines(math.pi / 4.0)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 50)
        ratios = trace.r[1:] / trace.r[:-1]
        assert np.abs(ratios - 0.5).max() <= 1e-9

    def test_deterministic(self, tripod):
        a = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 50)
        b = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 50)
        assert np.array_equal(a.r, b.r)
        assert a.points == b.points

    def test_steps_recomputable_from_points(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 40)
        assert trace.stride == 1
        for i in range(trace.completed):
            d = tripod.space.distance(trace.points[i], trace.points[i + 1])
            assert abs(d - trace.r[i]) <= 1e-12

    def test_iterates_land_in_first_set(self, tripod):
        from cycproj import project

        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 30)
        for idx, point in zip(trace.point_indices, trace.points):
            if idx == 0:
                continue
            assert project(tripod.space, tripod.sets[0], point).distance <= 1e-9

    def test_two_set_trace_records_y_series(self):
        scenario = build_plane_two_sets(0.5)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 20)
        # y_{n+1} = projection of x_n onto the second set; b_n = d(y_{n+1}, x_n)
        from cycproj import project

        x0 = scenario.start()
        y1 = project(scenario.space, scenario.sets[1], x0).point
        assert trace.b[0] == pytest.approx(scenario.space.distance(y1, x0), abs=1e-12)
        x1 = project(scenario.space, scenario.sets[0], y1).point
        assert trace.a[1] == pytest.approx(scenario.space.distance(x1, y1), abs=1e-12)
        assert np.isnan(trace.a[0])
        assert np.isnan(trace.s[0])
        # every cycle output lies in the first set
        assert all(p.y == 0.0 for i, p in zip(trace.point_indices, trace.points) if i >= 1)

    def test_decimation(self):
        scenario = build_plane_two_sets(0.5)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 200, stride=50)
        assert trace.point_indices[0] == 0
        kept = set(int(i) for i in trace.point_indices)
        assert {0, 1, 50, 51, 100, 101, 150, 151, 200} <= kept
        assert len(trace.r) == 200  # scalars never decimated

    def test_intermediates_recorded_for_small_runs(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 5)
        assert trace.intermediates is not None
        assert len(trace.intermediates) == 5
        assert all(len(mids) == 3 for mids in trace.intermediates)
        scenario = build_plane_two_sets(0.5)
        big = iterate(scenario.space, scenario.sets, scenario.start(), 1_500)
        assert big.intermediates is None

    def test_partial_trace_on_numerical_failure(self):
        scenario = build_plane_two_sets(1.0)
        trace = iterate(scenario.space, scenario.sets, PlanePoint(1e300, 0.0), 10)
        assert trace.failed
        assert trace.completed == 0
        assert "1e+300" in trace.failure

    def test_bad_arguments(self, tripod):
        with pytest.raises(ValueError):
            iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 0)
        with pytest.raises(ValueError):
            iterate(tripod.space, (), tripod.start("endpoint"), 5)


class TestTwoSetDiagnostics:
    def test_plane_two_sets_chains_hold(self):
        scenario = build_plane_two_sets(0.5)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 10_000)
        report = two_set_diagnostics(trace)
        assert report.passed
        assert report.step_chain_margin >= -1e-12
        assert report.gap_chain_margin >= -1e-12
        assert report.energy_margin >= -1e-12
        assert report.monotone_margin >= -1e-12
        assert report.sum_r_sq <= report.b1_sq + 1e-9

    def test_two_lines_chains_hold(self):
        scenario = build_plane_two_lines(math.pi / 4.0)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 50)
        assert two_set_diagnostics(trace).passed

    def test_requires_two_sets(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 5)
        with pytest.raises(ValueError):
            two_set_diagnostics(trace)


def synthetic_trace(r: np.ndarray) -> Trace:
    return Trace(
        space=None,
        sets=(None, None),
        start=None,
        requested=len(r),
        stride=1,
        r=np.asarray(r, dtype=float),
        point_indices=np.arange(len(r) + 1),
        points=[None] * (len(r) + 1),
    )


class TestRateFit:
    def test_exact_power_law(self):
        n = np.arange(1, 5001, dtype=float)
        trace = synthetic_trace(np.concatenate([[1.0], n**-0.6]))  # r[i] = i**-0.6
        fit = rate_fit(trace, (10, 4000))
        assert fit.slope == pytest.approx(-0.6, abs=1e-3)

    def test_constant_steps_have_zero_slope(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 100)
        fit = rate_fit(trace, (1, 99))
        assert fit.slope == pytest.approx(0.0, abs=1e-9)

    def test_zero_steps_excluded_with_warning(self):
        r = np.concatenate([np.ones(10), np.zeros(2), np.ones(10)])
        trace = synthetic_trace(r)
        with pytest.warns(UserWarning, match="excluded 2"):
            fit = rate_fit(trace, (1, 21))
        assert fit.zeros_excluded == 2

    def test_window_validation(self):
        trace = synthetic_trace(np.ones(10))
        with pytest.raises(ValueError):
            rate_fit(trace, (0, 5))
        with pytest.raises(ValueError):
            rate_fit(trace, (9, 30))


class TestVerdict:
    def test_tripod_not_regular(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("endpoint"), 100)
        v = verdict(trace, r_tol=1e-6)
        assert v.classification == "NotRegular"
        assert v.liminf_r == pytest.approx(1.0, abs=1e-9)
        # the declared bound is honored by the stored points themselves
        tail = trace.r[-20:]
        recomputed = [
            tripod.space.distance(trace.points[i], trace.points[i + 1])
            for i in range(80, 100)
        ]
        assert min(recomputed) >= v.liminf_r - 1e-12
        assert np.min(tail) >= v.liminf_r

    def test_two_lines_regular(self):
        scenario = build_plane_two_lines(math.pi / 4.0)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 200)
        assert verdict(trace).classification == "Regular"

    def test_slow_decay_is_inconclusive(self):
        scenario = build_plane_two_sets(0.5)
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 100)
        assert verdict(trace).classification == "Inconclusive"

    def test_all_zero_steps_regular(self, tripod):
        trace = iterate(tripod.space, tripod.sets, tripod.start("midpoint"), 10)
        assert verdict(trace).classification == "Regular"
