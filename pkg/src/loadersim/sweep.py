"""Screener-versus-simulation consistency sweep over (relief pressure, converter scale)."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .layout import MachineLayout, Scenario
from .machine import run_reversal
from .screener import Verdict, reversal_bench_curve, screen
from .units import RPM


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    p_relief: float
    converter_scale: float
    verdict: Verdict
    demand: float
    t_static_avail: float
    t_dynamic_avail: float
    stalled: bool
    stall_events: int
    min_engine_speed: float

    @property
    def consistent(self) -> bool:
        if self.verdict is Verdict.Infeasible:
            return self.stalled
        if self.verdict is Verdict.Feasible:
            return not self.stalled
        return True


def grid_axis(lo: float, hi: float, n: int, name: str) -> np.ndarray:
    if n < 1:
        raise SweepError(f"{name}: empty range (n = {n})")
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise SweepError(f"{name}: range must be finite")
    if n == 1:
        return np.array([float(lo)])
    if not lo < hi:
        raise SweepError(f"{name}: empty range {lo!r}..{hi!r}")
    return np.linspace(lo, hi, n)


def _evaluate(args) -> SweepRow:
    layout, scenario, p, f, curve = args
    cand = layout.with_relief(p).with_converter_scale(f)
    cand.validate()
    rep = screen(cand, scenario.reversal, curve, scenario.marginal_band)
    sim = run_reversal(cand, scenario.reversal, scenario.pile, scenario.operator,
                       dt=scenario.dt, record_stride=max(scenario.record_stride, 50))
    return SweepRow(p, f, rep.verdict, rep.demand, rep.t_static_avail, rep.t_dynamic_avail,
                    sim.stalled, sim.stall_events, sim.min_engine_speed)


def consistency_sweep(layout: MachineLayout, scenario: Scenario, reliefs: Sequence[float],
                      scales: Sequence[float], jobs: int = 1, max_points: int = 400) -> list[SweepRow]:
    """One row per grid point, relief-major, in grid order regardless of ``jobs``.

    The dynamic curve depends only on the engine, so it is measured once and
    shared by every layout in the grid.
    """
    n = len(reliefs) * len(scales)
    if n == 0:
        raise SweepError("empty sweep grid")
    if n > max_points:
        raise SweepError(f"sweep grid has {n} points, cap is {max_points}")
    curve = reversal_bench_curve(layout, scenario.reversal)
    tasks = [(layout, scenario, float(p), float(f), curve) for p in reliefs for f in scales]
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, n)) as pool:
            return list(pool.map(_evaluate, tasks))
    return [_evaluate(t) for t in tasks]


def default_jobs() -> int:
    return max(1, min(os.cpu_count() or 1, 8))


def summarize(rows: Sequence[SweepRow]) -> dict:
    counts = {v.value: sum(r.verdict is v for r in rows) for v in Verdict}
    return {
        "points": len(rows),
        "verdicts": counts,
        "infeasible_without_stall": sum(r.verdict is Verdict.Infeasible and not r.stalled for r in rows),
        "feasible_with_stall": sum(r.verdict is Verdict.Feasible and r.stalled for r in rows),
        "marginal_stalled": sum(r.verdict is Verdict.Marginal and r.stalled for r in rows),
        "agreement_rate": (sum(r.consistent for r in rows) / len(rows)) if rows else None,
    }


SWEEP_HEADER = ["p_relief_MPa", "converter_scale", "verdict", "demand_Nm", "static_Nm",
                "dynamic_Nm", "stalled", "stall_events", "min_engine_speed_rpm", "consistent"]


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow([repr(r.p_relief / 1e6), repr(r.converter_scale), r.verdict.value,
                        repr(r.demand), repr(r.t_static_avail), repr(r.t_dynamic_avail),
                        int(r.stalled), r.stall_events, repr(r.min_engine_speed / RPM),
                        int(r.consistent)])
