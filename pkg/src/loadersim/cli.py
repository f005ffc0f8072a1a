"""Command line entry point.

    loadersim simulate  [--layout L] [--scenario S] [--out DIR]
    loadersim screen    [--layout L] [--scenario S] [--curve CSV | --no-auto-bench]
    loadersim bench     [--layout L] [--scenario S] [--accel A]
    loadersim sweep     [--layout L] [--scenario S] [--relief 10:35:5] [--scale 0.5:2:5]
    loadersim init      DIR

Exit codes:
    0  success (simulate: clean cycle; screen: Feasible)
    1  screen: Marginal
    2  screen: Infeasible
    3  simulate: engine stall detected
    4  invalid layout or scenario (message names the field)
    5  screen: no dynamic curve available, or it does not cover the reversal speed
    6  bench: acceleration not achievable
    7  sweep: empty range or grid above the cap
    8  simulate: cycle did not reach Done before t_end (no stall)

The output directory defaults to ``--out``, overridden by $LOADERSIM_OUT.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bench import AccelerationNotAchievable, BenchError, BenchRun, dynamic_torque_curve, read_curve, write_curve
from .bench import reversal_accel_rate
from .config import ConfigError, layout_to_dict, load_layout, load_scenario, scenario_to_dict, write_yaml
from .core import SimulationError
from .layout import LayoutError, nominal_layout, nominal_scenario
from .machine import run_cycle
from .screener import REPORT_SCHEMA, CurveCoverageError, reversal_bench_curve, screen
from .sweep import (SweepError, consistency_sweep, default_jobs, grid_axis, summarize,
                    write_sweep_csv)
from .tables import TableError
from .units import RPM, UnitError, parse_quantity

log = logging.getLogger("loadersim")

EXIT_OK = 0
EXIT_MARGINAL = 1
EXIT_INFEASIBLE = 2
EXIT_STALL = 3
EXIT_INVALID = 4
EXIT_NO_CURVE = 5
EXIT_BENCH = 6
EXIT_SWEEP = 7
EXIT_INCOMPLETE = 8

OUT_ENV = "LOADERSIM_OUT"


def _out_dir(args) -> Path:
    out = Path(os.environ.get(OUT_ENV) or args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args):
    layout = load_layout(args.layout) if args.layout else nominal_layout()
    scenario = load_scenario(args.scenario, layout) if args.scenario else nominal_scenario().validate(layout)
    return layout, scenario


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    layout, scenario = _load(args)
    trace, metrics = run_cycle(layout, scenario, dt=args.dt)
    out = _out_dir(args)
    trace.write_csv(out / "trace.csv")
    _write_json(out / "metrics.json", metrics.as_dict())
    print(json.dumps(metrics.as_dict(), sort_keys=True))
    if metrics.stall_events > 0:
        return EXIT_STALL
    return EXIT_OK if metrics.complete else EXIT_INCOMPLETE


def cmd_screen(args) -> int:
    layout, scenario = _load(args)
    rev = scenario.reversal
    if args.curve:
        try:
            curve = read_curve(args.curve)
        except (OSError, TableError) as exc:
            print(f"error: cannot read dynamic curve {args.curve}: {exc}", file=sys.stderr)
            return EXIT_NO_CURVE
    elif args.no_auto_bench:
        print("error: no dynamic curve given and auto-bench disabled; run `loadersim bench` first",
              file=sys.stderr)
        return EXIT_NO_CURVE
    else:
        curve = reversal_bench_curve(layout, rev)
    try:
        report = screen(layout, rev, curve, scenario.marginal_band)
    except CurveCoverageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CURVE
    out = _out_dir(args)
    _write_json(out / "report.json", report.as_dict())
    if args.schema:
        _write_json(out / "report.schema.json", REPORT_SCHEMA)
    print(json.dumps(report.as_dict(), sort_keys=True))
    return report.verdict.exit_code


def cmd_bench(args) -> int:
    layout, scenario = _load(args)
    spec = layout.engine
    accel = (parse_quantity(args.accel, "angular_accel", "--accel") if args.accel
             else reversal_accel_rate(spec, scenario.reversal.reversal_time))
    run = BenchRun(accel=accel, omega_start=spec.low_idle, omega_end=spec.high_idle, samples=args.samples)
    try:
        curve = dynamic_torque_curve(spec, run)
    except AccelerationNotAchievable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BENCH
    out = _out_dir(args)
    path = out / args.name
    write_curve(path, curve)
    print(f"wrote {path} ({len(curve.omega)} samples, accel {accel:.3f} rad/s^2)")
    return EXIT_OK


def _axis(text: str, dimension: str, name: str):
    parts = text.split(":")
    if len(parts) == 1:
        return grid_axis(parse_quantity(parts[0], dimension, name), 0.0, 1, name)
    if len(parts) != 3:
        raise SweepError(f"{name}: expected LO:HI:N, got {text!r}")
    try:
        n = int(parts[2])
    except ValueError:
        raise SweepError(f"{name}: point count must be an integer, got {parts[2]!r}") from None
    lo = parse_quantity(parts[0], dimension, name)
    hi = parse_quantity(parts[1], dimension, name)
    return grid_axis(lo, hi, n, name)


def cmd_sweep(args) -> int:
    layout, scenario = _load(args)
    try:
        reliefs = _axis(args.relief, "pressure", "--relief")
        scales = _axis(args.scale, "dimensionless", "--scale")
        rows = consistency_sweep(layout, scenario, reliefs, scales, jobs=args.jobs, max_points=args.max_points)
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SWEEP
    out = _out_dir(args)
    write_sweep_csv(out / "sweep.csv", rows)
    summary = summarize(rows)
    _write_json(out / "sweep_summary.json", summary)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_init(args) -> int:
    target = Path(args.dir)
    target.mkdir(parents=True, exist_ok=True)
    write_yaml(target / "layout.yaml", layout_to_dict(nominal_layout()))
    write_yaml(target / "scenario.yaml", scenario_to_dict(nominal_scenario()))
    print(f"wrote {target / 'layout.yaml'} and {target / 'scenario.yaml'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loadersim", description="Wheel loader reversal screening and simulation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--layout", help="layout YAML (default: nominal machine)")
        sp.add_argument("--scenario", help="scenario YAML (default: nominal scenario)")
        sp.add_argument("--out", default="out", help=f"output directory (env {OUT_ENV} overrides)")

    s = sub.add_parser("simulate", help="run one short loading cycle")
    common(s)
    s.add_argument("--dt", type=float, default=None, help="override the step size [s]")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("screen", help="reversal-phase torque budget verdict")
    common(s)
    s.add_argument("--curve", help="dynamic torque curve CSV from `bench`")
    s.add_argument("--no-auto-bench", action="store_true", help="fail instead of running the bench")
    s.add_argument("--schema", action="store_true", help="also write the report JSON schema")
    s.set_defaults(func=cmd_screen)

    s = sub.add_parser("bench", help="forced run-up to a dynamic torque curve")
    common(s)
    s.add_argument("--accel", help='forced acceleration, e.g. "30 rad/s2" (default: from reversal_time)')
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--name", default="dynamic_curve.csv")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("sweep", help="screener vs simulation over relief x converter scale")
    common(s)
    s.add_argument("--relief", default="10MPa:35MPa:5", help="LO:HI:N relief pressures")
    s.add_argument("--scale", default="0.5:2.0:5", help="LO:HI:N converter capacity scale factors")
    s.add_argument("--jobs", type=int, default=default_jobs())
    s.add_argument("--max-points", type=int, default=400)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("init", help="write the nominal layout and scenario files")
    s.add_argument("dir")
    s.set_defaults(func=cmd_init)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LayoutError, ConfigError, UnitError, TableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BENCH
    except SimulationError as exc:
        print(f"error: simulation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
