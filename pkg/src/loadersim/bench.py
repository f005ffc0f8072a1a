"""Virtual engine test bench: forced-acceleration run-ups against a brake.

The brake imposes the speed trajectory omega(t) = omega_start + accel * t
on a full-throttle engine.  Whatever crank torque is not needed to
accelerate the rotating inertia is absorbed by the brake, and that brake
torque, logged against speed, is the dynamic torque curve.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import integrate
from .engine import EngineSpec, available_torque
from .tables import Table, read_columns, write_columns
from .units import RPM


class BenchError(RuntimeError):
    pass


class AccelerationNotAchievable(BenchError):
    def __init__(self, omega: float):
        super().__init__(f"acceleration not achievable above omega = {omega:.3f} rad/s")
        self.omega = omega


@dataclass(frozen=True)
class BenchRun:
    accel: float            # rad/s^2
    omega_start: float      # rad/s
    omega_end: float        # rad/s
    samples: int = 100

    def validate(self) -> None:
        if not self.accel > 0:
            raise BenchError("bench.accel: must be > 0")
        if not self.omega_start < self.omega_end:
            raise BenchError("bench.omega_start: must be below omega_end")
        if self.samples < 10:
            raise BenchError("bench.samples: must be >= 10")


@dataclass(frozen=True, eq=False)
class DynamicCurve:
    omega: np.ndarray       # rad/s, sample speeds
    torque: np.ndarray      # N*m, brake torque at each sample
    time: np.ndarray        # s since the start of the run-up
    engine_torque: np.ndarray  # N*m, crank torque before the inertia share
    accel: float
    omega_start: float
    omega_end: float
    spec_hash: str = ""

    @property
    def table(self) -> Table:
        return Table(self.omega, self.torque)

    def covers(self, omega: float) -> bool:
        return self.omega_start <= omega <= self.omega_end

    def __call__(self, omega: float) -> float:
        return self.table(omega)


def spec_hash(spec: EngineSpec) -> str:
    payload = {k: (list(map(list, (v.x, v.y))) if hasattr(v, "x") else v)
               for k, v in asdict(spec).items()}
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def reversal_accel_rate(spec: EngineSpec, reversal_time: float) -> float:
    """Speed gap from low idle up to peak-torque speed, covered in one reversal."""
    if not reversal_time > 0:
        raise BenchError("reversal_time must be > 0")
    return (spec.max_torque_speed - spec.low_idle) / reversal_time


def initial_boost(spec: EngineSpec, omega: float) -> float:
    """Settled boost at ``omega`` with no brake load (covers only the accessory drag)."""
    if spec.accessory_torque <= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        u = 0.5 * (lo + hi)
        if u * available_torque(spec, omega, u) > spec.accessory_torque:
            hi = u
        else:
            lo = u
    return hi


def forced_runup(spec: EngineSpec, run: BenchRun, max_substep: float | None = None) -> DynamicCurve:
    """Perform the run-up and log brake torque at ``samples`` evenly spaced speeds.

    Samples are logged at the end of each speed increment, the first one
    increment above ``omega_start``; lookups below it clamp to that value.
    Raises AccelerationNotAchievable as soon as the full-throttle torque can
    no longer supply the inertia term.
    """
    run.validate()
    a = run.accel
    drag = spec.accessory_torque
    inertia = spec.inertia_j * a
    h_max = max_substep if max_substep is not None else (
        spec.turbo_tau / 20.0 if spec.turbo_tau > 0 else math.inf)
    speeds = run.omega_start + (run.omega_end - run.omega_start) * np.arange(1, run.samples + 1) / run.samples
    times = (speeds - run.omega_start) / a

    def dboost(x, t):
        return np.array([(1.0 - x[0]) / spec.turbo_tau])

    def crank(t, b):
        w = run.omega_start + a * t
        return available_torque(spec, w, 1.0 if spec.turbo_tau == 0 else b) - drag

    b = 0.0 if spec.turbo_tau == 0 else initial_boost(spec, run.omega_start)
    t = 0.0
    te = np.empty(run.samples)
    if crank(0.0, b) < inertia:
        raise AccelerationNotAchievable(run.omega_start)
    for i, t_next in enumerate(times):
        span = t_next - t
        n = max(1, int(math.ceil(span / h_max))) if math.isfinite(h_max) else 1
        h = span / n
        for _ in range(n):
            if spec.turbo_tau > 0:
                b = min(float(integrate(dboost, [b], t, h)[0]), 1.0)
            t += h
            if crank(t, b) < inertia:
                raise AccelerationNotAchievable(run.omega_start + a * t)
        t = t_next
        te[i] = crank(t, b)
    return DynamicCurve(omega=speeds, torque=te - inertia, time=times, engine_torque=te,
                        accel=a, omega_start=run.omega_start, omega_end=run.omega_end,
                        spec_hash=spec_hash(spec))


def dynamic_torque_curve(spec: EngineSpec, run: BenchRun) -> DynamicCurve:
    return forced_runup(spec, run)


def default_run(spec: EngineSpec, accel: float, samples: int = 100) -> BenchRun:
    return BenchRun(accel=accel, omega_start=spec.low_idle, omega_end=spec.high_idle, samples=samples)


def write_curve(path: str | Path, curve: DynamicCurve) -> None:
    meta = json.dumps({"accel_rad_s2": curve.accel, "spec_hash": curve.spec_hash,
                       "omega_start_rad_s": curve.omega_start, "omega_end_rad_s": curve.omega_end},
                      sort_keys=True)
    write_columns(path, ["rpm", "torque_Nm"], [curve.omega / RPM, curve.torque], comment=meta)


def read_curve(path: str | Path) -> DynamicCurve:
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                meta = json.loads(line[1:].strip())
                break
    rpm, tq = read_columns(path, 2)
    w = np.array(rpm) * RPM
    return DynamicCurve(omega=w, torque=np.array(tq), time=np.full(len(w), np.nan),
                        engine_torque=np.full(len(w), np.nan),
                        accel=float(meta.get("accel_rad_s2", math.nan)),
                        omega_start=float(meta.get("omega_start_rad_s", w[0])),
                        omega_end=float(meta.get("omega_end_rad_s", w[-1])),
                        spec_hash=str(meta.get("spec_hash", "")))
