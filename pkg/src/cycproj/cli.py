"""Command-line front end: run scenarios, verify invariants, fit rates, sweep.

Exit codes are a stable contract: 0 on success, 2 on usage errors (unknown
scenario or suite, bad parameters), 3 on numerical failure (the trace file
is still written, truncated and flagged).  Options may also be supplied as
``key=value`` lines in a config file; explicit flags win.  The only
environment variable consulted is ``CYCPROJ_OUT_DIR`` (default output
directory).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import traceio
from .engine import iterate, rate_fit, verdict
from .scenarios import Scenario, build_scenario
from .spaces import Plane, ProductSpace, TwistedChain
from .verify import run_suite, suite_names

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_SCENARIO_PARAMS = ("epsilon", "alpha", "radius", "circumference", "theta", "k")

_RUN_DEFAULTS = {
    "n": 100,
    "tol": 1e-12,
    "format": "csv",
    "start": None,
    "start_coords": None,
    "stride": None,
    "out": None,
    "rate_window": None,
}


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", help="scenario name (see 'cycproj run --help')")
    parser.add_argument("--n", type=int, default=None, help="number of cycles (default 100)")
    parser.add_argument("--start", default=None, help="label of a recommended start point")
    parser.add_argument("--start-coords", default=None,
                        help="explicit start: plane 'x,y'; tree product "
                             "'leg:off,leg:off'; chain 'u,v,height'")
    parser.add_argument("--tol", type=float, default=None, help="projection tolerance")
    parser.add_argument("--stride", type=int, default=None, help="point storage stride")
    parser.add_argument("--out", default=None, help="output trace path")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="trace file format (default csv)")
    parser.add_argument("--rate-window", type=int, nargs=2, metavar=("LO", "HI"),
                        default=None, help="fit log r vs log n over this index window")
    parser.add_argument("--config", default=None, help="key=value config file; flags win")
    for name in ("epsilon", "alpha", "radius", "circumference", "theta"):
        parser.add_argument(f"--{name}", type=float, default=None)
    parser.add_argument("--k", type=int, default=None, help="number of sets (tripod)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycproj",
        description="Cyclic closest-point projections on the benchmark scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and export its trace")
    _add_run_options(p_run)

    p_verify = sub.add_parser("verify", help="run an invariant suite")
    p_verify.add_argument("suite", help=f"one of: {', '.join(suite_names())}")
    p_verify.add_argument("--seed", type=int, default=0)

    p_rate = sub.add_parser("rate", help="run a scenario and fit the decay rate")
    _add_run_options(p_rate)
    p_rate.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"),
                        default=None, help="fit window (defaults to [n/10, n])")

    p_sweep = sub.add_parser("sweep", help="run a scenario over a parameter grid")
    _add_run_options(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         help=f"swept parameter: one of {', '.join(_SCENARIO_PARAMS)}")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated grid values (may be empty)")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="concurrent runs (results are merged by grid index)")
    return parser


# ---------------------------------------------------------------------------
# Config handling


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_TYPES = {
    "n": int,
    "stride": int,
    "k": int,
    "tol": float,
    "epsilon": float,
    "alpha": float,
    "radius": float,
    "circumference": float,
    "theta": float,
    "start": str,
    "start_coords": str,
    "out": str,
    "format": str,
}


def _merge_config(args: argparse.Namespace) -> None:
    """Fill options the flags left unset from the config file, then defaults."""
    if getattr(args, "config", None):
        for key, raw in _read_config(args.config).items():
            if key == "rate_window":
                parsed = [int(v) for v in raw.split()]
            elif key in _CONFIG_TYPES:
                parsed = _CONFIG_TYPES[key](raw)
            else:
                raise ValueError(f"unknown config key {key!r}")
            if getattr(args, key, None) is None:
                setattr(args, key, parsed)
    for key, default in _RUN_DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, default)


def _scenario_from_args(args: argparse.Namespace) -> Scenario:
    params = {}
    for name in _SCENARIO_PARAMS:
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    return build_scenario(args.scenario, **params)


def _parse_start_coords(space, text: str):
    parts = [p.strip() for p in text.split(",")]
    if isinstance(space, Plane):
        x, y = (float(p) for p in parts)
        return space.point(x, y)
    if isinstance(space, ProductSpace):
        (l_leg, l_off), (r_leg, r_off) = (p.split(":") for p in parts)
        return space.point(
            space.left.point(int(l_leg), float(l_off)),
            space.right.point(int(r_leg), float(r_off)),
        )
    if isinstance(space, TwistedChain):
        u, v, h = (float(p) for p in parts)
        return space.point(u, v, h)
    raise ValueError(f"no coordinate parser for {type(space).__name__}")


def _out_path(args: argparse.Namespace, scenario: Scenario) -> str:
    if args.out:
        return args.out
    out_dir = os.environ.get("CYCPROJ_OUT_DIR", ".")
    ext = "csv" if args.format == "csv" else "json"
    return os.path.join(out_dir, f"{scenario.name}-n{args.n}.{ext}")


# ---------------------------------------------------------------------------
# Commands


def _execute_run(args: argparse.Namespace):
    """Shared run/rate body; returns (exit_code, summary dict)."""
    scenario = _scenario_from_args(args)
    if args.start_coords is not None:
        start = _parse_start_coords(scenario.space, args.start_coords)
        start_label = "explicit"
    else:
        label = args.start or scenario.default_start
        try:
            start = scenario.start(label)
        except KeyError:
            raise ValueError(
                f"unknown start {label!r}; available: {', '.join(scenario.starts)}"
            ) from None
        start_label = label

    trace = iterate(scenario.space, scenario.sets, start, args.n,
                    tol=args.tol, stride=args.stride)
    if trace.completed == 0:
        path = _out_path(args, scenario)
        traceio.write_trace_csv(trace, path)
        print(f"numerical failure on the first cycle: {trace.failure}; "
              f"partial trace written to {path}", file=sys.stderr)
        return EXIT_NUMERICAL, {"scenario": scenario.name, "failed": True}
    v = verdict(trace)

    slope = None
    window = getattr(args, "window", None) or args.rate_window
    fit = None
    if window is not None:
        fit = rate_fit(trace, tuple(window))
        slope = fit.slope

    summary = traceio.summary_dict(trace, v, scenario=scenario.name,
                                   params=dict(scenario.params), slope=slope)
    path = _out_path(args, scenario)
    if args.format == "csv":
        traceio.write_trace_csv(trace, path)
    else:
        traceio.write_trace_json(trace, summary, path)

    slope_text = "n/a" if summary["slope"] is None else f"{summary['slope']:.6g}"
    print(f"scenario={scenario.name} n={trace.completed} start={start_label} "
          f"verdict={v.classification} final_r={v.final_r:.9g} "
          f"liminf_r={v.liminf_r:.9g} slope={slope_text} out={path}")
    if fit is not None:
        lo = max(1, window[0])
        hi = min(trace.completed - 1, window[1])
        lo_val = math.sqrt(lo) * float(trace.r[lo])
        hi_val = math.sqrt(hi) * float(trace.r[hi])
        print(f"rate: slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
              f"sqrt(n)*r at n={lo}: {lo_val:.6g}; at n={hi}: {hi_val:.6g}")

    if trace.failed:
        print(f"numerical failure after {trace.completed} cycles: {trace.failure}; "
              f"partial trace written to {path}", file=sys.stderr)
        return EXIT_NUMERICAL, summary
    return EXIT_OK, summary


def cmd_run(args: argparse.Namespace) -> int:
    code, _ = _execute_run(args)
    return code


def cmd_rate(args: argparse.Namespace) -> int:
    if getattr(args, "window", None) is None:
        args.window = (max(1, args.n // 10), args.n)
    return _execute_run(args)[0]


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_suite(args.suite, seed=args.seed)
    for result in results:
        print(result.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else 1


def _sweep_worker(payload: tuple) -> dict:
    index, scenario_name, params, n, tol, stride, start_label = payload
    scenario = build_scenario(scenario_name, **params)
    start = scenario.start(start_label) if start_label else scenario.start()
    trace = iterate(scenario.space, scenario.sets, start, n, tol=tol, stride=stride)
    v = verdict(trace)
    summary = traceio.summary_dict(trace, v, scenario=scenario.name,
                                   params=dict(scenario.params))
    summary["grid_index"] = index
    return summary


def cmd_sweep(args: argparse.Namespace) -> int:
    values_text = args.values.strip()
    values = [v.strip() for v in values_text.split(",") if v.strip()] if values_text else []
    caster = int if args.param == "k" else float
    grid = [caster(v) for v in values]

    base_params = {}
    for name in _SCENARIO_PARAMS:
        value = getattr(args, name, None)
        if value is not None:
            base_params[name] = value

    payloads = []
    for i, value in enumerate(grid):
        params = dict(base_params)
        params[args.param] = value
        payloads.append((i, args.scenario, params, args.n, args.tol, args.stride, args.start))

    results: list[dict | None] = [None] * len(payloads)
    errors = 0
    if args.jobs > 1 and payloads:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for index, outcome in enumerate(pool.map(_try_sweep_worker, payloads)):
                results[index] = outcome
    else:
        for index, payload in enumerate(payloads):
            results[index] = _try_sweep_worker(payload)
    for outcome in results:
        if "error" in outcome or outcome.get("failed"):
            errors += 1

    scenario_label = args.scenario
    out = args.out or os.path.join(os.environ.get("CYCPROJ_OUT_DIR", "."),
                                   f"{scenario_label}-sweep-{args.param}.json")
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(results, fh, sort_keys=True)
        fh.write("\n")
    print(f"sweep: {len(grid)} runs, {errors} failed, results in {out}")
    return EXIT_OK if errors == 0 else EXIT_NUMERICAL


def _try_sweep_worker(payload: tuple) -> dict:
    try:
        return _sweep_worker(payload)
    except Exception as exc:  # per-run failures recorded, sweep continues
        return {"grid_index": payload[0], "error": str(exc)}


_COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "rate": cmd_rate,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("run", "rate", "sweep"):
            _merge_config(args)
        return _COMMANDS[args.command](args)
    except (KeyError, ValueError, TypeError, OSError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
