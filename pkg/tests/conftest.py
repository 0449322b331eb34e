"""Shared fixtures: scenario builders and cached long runs."""

from __future__ import annotations

import time

import pytest

from cycproj import build_plane_two_sets, build_tripod_counterexample, iterate


@pytest.fixture(scope="session")
def tripod():
    return build_tripod_counterexample(3)


@pytest.fixture(scope="session")
def long_two_set_runs():
    """Million-cycle two-set traces per epsilon, with wall-clock durations.

    Computed once per session; the epsilon = 1/2 run is shared between the
    inequality checks and the rate fits.
    """
    runs = {}
    for eps in (0.25, 0.5, 1.0):
        scenario = build_plane_two_sets(eps)
        t0 = time.perf_counter()
        # one extra cycle so the step r_n at n = 10^6 itself exists
        trace = iterate(scenario.space, scenario.sets, scenario.start(), 10**6 + 1)
        runs[eps] = (trace, time.perf_counter() - t0)
    return runs
