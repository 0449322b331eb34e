"""Trace export and import: CSV rows and JSON summaries.

CSV layout is fixed for downstream plotting: columns ``n, r, s, a, b``
followed by the flattened coordinates of x_n.  Scalars missing at an index
(NaN diagnostics, steps past the end, decimated points) are written as
empty fields.  Files are UTF-8 with a header row, '.' decimals, and
LF line ends.
"""

from __future__ import annotations

import csv
import json
import math
from typing import Sequence

import numpy as np

from .engine import RegularityVerdict, Trace
from .spaces import ChainPoint, Plane, PlanePoint, ProductPoint, ProductSpace, StarPoint, TwistedChain

__all__ = [
    "coordinate_headers",
    "point_to_row",
    "row_to_point",
    "write_trace_csv",
    "read_trace_csv",
    "summary_dict",
    "write_trace_json",
]


def coordinate_headers(space) -> list[str]:
    if isinstance(space, Plane):
        return ["x", "y"]
    if isinstance(space, ProductSpace):
        return ["left_leg", "left_offset", "right_leg", "right_offset"]
    if isinstance(space, TwistedChain):
        return ["u", "v", "height"]
    raise TypeError(f"no CSV coordinate layout for {type(space).__name__}")


def point_to_row(space, point) -> list[float]:
    if isinstance(space, Plane):
        return [point.x, point.y]
    if isinstance(space, ProductSpace):
        return [point.left.leg, point.left.offset, point.right.leg, point.right.offset]
    if isinstance(space, TwistedChain):
        return [point.u, point.v, point.height]
    raise TypeError(f"no CSV coordinate layout for {type(space).__name__}")


def row_to_point(space, values: Sequence[float]):
    if isinstance(space, Plane):
        return PlanePoint(values[0], values[1])
    if isinstance(space, ProductSpace):
        return ProductPoint(
            StarPoint(int(values[0]), values[1]),
            StarPoint(int(values[2]), values[3]),
        )
    if isinstance(space, TwistedChain):
        return ChainPoint(values[0], values[1], values[2])
    raise TypeError(f"no CSV coordinate layout for {type(space).__name__}")


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def write_trace_csv(trace: Trace, path) -> None:
    """One row per cycle index 0..completed; coords only where stored."""
    space = trace.space
    headers = ["n", "r", "s", "a", "b"] + coordinate_headers(space)
    stored = {int(i): p for i, p in zip(trace.point_indices, trace.points)}
    n = trace.completed
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(headers)
        for i in range(n + 1):
            r = trace.r[i] if i < n else None
            s = trace.s[i] if trace.s is not None and i < len(trace.s) else None
            a = trace.a[i] if trace.a is not None and i < len(trace.a) else None
            b = trace.b[i] if trace.b is not None and i < len(trace.b) else None
            row = [str(i), _fmt(r), _fmt(s), _fmt(a), _fmt(b)]
            point = stored.get(i)
            if point is not None:
                row.extend(_fmt(v) for v in point_to_row(space, point))
            else:
                row.extend("" for _ in headers[5:])
            writer.writerow(row)


def read_trace_csv(path) -> dict[str, list]:
    """Read a trace CSV back into columns (floats, None for empty fields)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        headers = next(reader)
        columns: dict[str, list] = {h: [] for h in headers}
        for row in reader:
            for h, cell in zip(headers, row):
                columns[h].append(float(cell) if cell != "" else None)
    return columns


def _clean(value):
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def summary_dict(trace: Trace, v: RegularityVerdict, *, scenario: str,
                 params: dict, slope: float | None = None) -> dict:
    """The stable machine-readable run summary."""
    r = trace.r
    sum_r_sq = float(np.sum(r[1:] ** 2)) if trace.completed >= 2 else 0.0
    return {
        "scenario": scenario,
        "params": {k: _clean(float(val)) for k, val in params.items()},
        "n": trace.completed,
        "verdict": v.classification,
        "final_r": _clean(v.final_r),
        "liminf_r": _clean(v.liminf_r),
        "slope": _clean(slope if slope is not None else v.rate_slope),
        "sums": {"r_sq": sum_r_sq},
        "failed": trace.failed,
    }


def _array_json(arr) -> list | None:
    if arr is None:
        return None
    return [_clean(float(v)) for v in arr]


def write_trace_json(trace: Trace, summary: dict, path) -> None:
    payload = dict(summary)
    payload["trace"] = {
        "point_indices": [int(i) for i in trace.point_indices],
        "points": [point_to_row(trace.space, p) for p in trace.points],
        "r": _array_json(trace.r),
        "s": _array_json(trace.s),
        "a": _array_json(trace.a),
        "b": _array_json(trace.b),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
