"""Trace serialization: coordinate layouts, decimation, JSON payloads."""

from __future__ import annotations

import json

import pytest

from cycproj import build_scenario, iterate, verdict
from cycproj.traceio import (
    coordinate_headers,
    point_to_row,
    read_trace_csv,
    row_to_point,
    summary_dict,
    write_trace_csv,
    write_trace_json,
)


@pytest.mark.parametrize("name, params, expected_headers", [
    ("plane-two-sets", {"epsilon": 0.5}, ["x", "y"]),
    ("tripod", {}, ["left_leg", "left_offset", "right_leg", "right_offset"]),
    ("twisted-chain", {}, ["u", "v", "height"]),
])
def test_point_row_roundtrip(name, params, expected_headers):
    scenario = build_scenario(name, **params)
    assert coordinate_headers(scenario.space) == expected_headers
    start = scenario.start()
    row = point_to_row(scenario.space, start)
    assert len(row) == len(expected_headers)
    back = row_to_point(scenario.space, row)
    assert scenario.space.distance(start, back) <= 1e-15


@pytest.mark.parametrize("name", ["tripod", "twisted-chain"])
def test_csv_roundtrip_recomputes_steps(tmp_path, name):
    scenario = build_scenario(name)
    trace = iterate(scenario.space, scenario.sets, scenario.start(), 30)
    path = tmp_path / f"{name}.csv"
    write_trace_csv(trace, path)
    columns = read_trace_csv(path)
    coord_names = coordinate_headers(scenario.space)
    points = [
        row_to_point(scenario.space, [columns[h][i] for h in coord_names])
        for i in range(31)
    ]
    for i in range(30):
        d = scenario.space.distance(points[i], points[i + 1])
        assert abs(d - columns["r"][i]) <= 1e-9


def test_decimated_csv_has_empty_coordinate_cells(tmp_path):
    scenario = build_scenario("plane-two-sets", epsilon=0.5)
    trace = iterate(scenario.space, scenario.sets, scenario.start(), 100, stride=20)
    path = tmp_path / "decimated.csv"
    write_trace_csv(trace, path)
    columns = read_trace_csv(path)
    assert len(columns["n"]) == 101
    assert all(columns["r"][i] is not None for i in range(100))  # scalars kept
    stored = {int(i) for i in trace.point_indices}
    for i in (0, 1, 20, 21, 100):
        assert i in stored
        assert columns["x"][i] is not None
    assert columns["x"][7] is None  # decimated away


def test_json_payload_is_valid_json_with_nulls(tmp_path):
    scenario = build_scenario("plane-two-sets", epsilon=0.5)
    trace = iterate(scenario.space, scenario.sets, scenario.start(), 10)
    summary = summary_dict(trace, verdict(trace), scenario=scenario.name,
                           params=dict(scenario.params))
    path = tmp_path / "trace.json"
    write_trace_json(trace, summary, path)
    payload = json.loads(path.read_text())  # NaN would make this raise
    assert payload["trace"]["a"][0] is None
    assert payload["trace"]["s"][0] is None
    assert len(payload["trace"]["r"]) == 10
    assert payload["n"] == 10
