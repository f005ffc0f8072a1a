"""Mean-value turbocharged diesel engine.

Torque available at the crank is the static full-load curve scaled by a
smoke-limiter fraction of the current boost level.  Boost chases the
throttle with a first-order lag, so a suddenly loaded engine at low boost
only has a fraction of its static torque until the turbo catches up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NonFiniteError, integrate
from .tables import Table
from .units import RPM


@dataclass(frozen=True)
class EngineSpec:
    static_torque: Table          # rad/s -> N*m, full load, fully boosted
    inertia_j: float              # kg*m^2, engine + flywheel + converter pump wheel
    turbo_tau: float              # s; 0 means boost follows throttle instantly
    smoke_limit: Table            # boost fraction -> torque fraction
    low_idle: float               # rad/s
    high_idle: float              # rad/s
    governor_gain: float          # throttle per rad/s of speed error
    stall_fraction: float = 0.8   # stall flagged below stall_fraction * low_idle
    accessory_torque: float = 0.0  # N*m, constant parasitic load

    def validate(self) -> None:
        if min(self.static_torque.y) < 0:
            raise ValueError("engine.static_torque: torque must be >= 0")
        if not self.low_idle < self.high_idle:
            raise ValueError("engine.low_idle: must be below high_idle")
        if self.low_idle <= 0:
            raise ValueError("engine.low_idle: must be > 0")
        if not self.smoke_limit.is_nondecreasing():
            raise ValueError("engine.smoke_limit: must be non-decreasing")
        if abs(self.smoke_limit(1.0) - 1.0) > 1e-12:
            raise ValueError("engine.smoke_limit: value at boost 1 must be 1")
        if min(self.smoke_limit.y) < 0 or max(self.smoke_limit.y) > 1:
            raise ValueError("engine.smoke_limit: fractions must lie in [0, 1]")
        if self.turbo_tau < 0:
            raise ValueError("engine.turbo_tau: must be >= 0")
        if not self.inertia_j > 0:
            raise ValueError("engine.inertia_j: must be > 0")
        if self.governor_gain < 0:
            raise ValueError("engine.governor_gain: must be >= 0")
        if not 0 < self.stall_fraction < 1:
            raise ValueError("engine.stall_fraction: must lie in (0, 1)")
        if self.accessory_torque < 0:
            raise ValueError("engine.accessory_torque: must be >= 0")

    @property
    def stall_speed(self) -> float:
        return self.stall_fraction * self.low_idle

    @property
    def max_torque_speed(self) -> float:
        """Grid speed of the static torque peak (first one if the peak is flat)."""
        return self.static_torque.x[int(np.argmax(self.static_torque.y))]

    @property
    def rated_speed(self) -> float:
        """Grid speed of peak static power."""
        x = np.array(self.static_torque.x)
        return float(x[int(np.argmax(x * np.array(self.static_torque.y)))])


@dataclass(frozen=True)
class EngineState:
    omega: float
    boost: float


@dataclass(frozen=True)
class EngineStepInfo:
    """Step-averaged quantities over one engine step (for power bookkeeping)."""

    throttle: float        # throttle actually applied (after low-idle protection)
    torque: float          # mean delivered crank torque, N*m
    accel: float           # mean angular acceleration, rad/s^2
    work: float            # J delivered over the step
    load_torque: float


def nominal_engine() -> EngineSpec:
    rpm = [600, 800, 1100, 1400, 1800, 2200]
    nm = [300, 900, 1100, 1200, 1050, 800]
    return EngineSpec(
        static_torque=Table([r * RPM for r in rpm], nm),
        inertia_j=4.0,
        turbo_tau=0.5,
        smoke_limit=Table([0.0, 1.0], [0.4, 1.0]),
        low_idle=800 * RPM,
        high_idle=2200 * RPM,
        governor_gain=0.1,
    )


def available_torque(spec: EngineSpec, omega: float, boost: float) -> float:
    return spec.static_torque(omega) * spec.smoke_limit(boost)


def governor_throttle(spec: EngineSpec, omega_target: float, omega: float) -> float:
    return min(max(spec.governor_gain * (omega_target - omega), 0.0), 1.0)


def protected_throttle(spec: EngineSpec, throttle: float, omega: float) -> float:
    """Raise the throttle to the low-idle governor value when below low idle."""
    throttle = min(max(throttle, 0.0), 1.0)
    if omega < spec.low_idle:
        throttle = max(throttle, governor_throttle(spec, spec.low_idle, omega))
    return throttle


def advance(spec: EngineSpec, state: EngineState, throttle: float, load_torque: float,
            dt: float) -> tuple[EngineState, EngineStepInfo]:
    """Integrate the crank and boost states over one step.

    Throttle and load are held over the step.  The delivered torque and work
    are integrated alongside speed and boost so that the step-averaged torque
    exactly matches the speed change the integrator produced.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not math.isfinite(load_torque):
        raise NonFiniteError(f"non-finite engine load torque {load_torque!r}")
    u = protected_throttle(spec, throttle, state.omega)
    instant_boost = spec.turbo_tau == 0.0

    def rhs(x, t):
        w = max(x[0], 0.0)
        b = u if instant_boost else min(max(x[1], 0.0), 1.0)
        te = u * available_torque(spec, w, b)
        db = 0.0 if instant_boost else (u - b) / spec.turbo_tau
        return np.array([(te - load_torque) / spec.inertia_j, db, te, te * w])

    x0 = np.array([state.omega, u if instant_boost else state.boost, 0.0, 0.0])
    x1 = integrate(rhs, x0, 0.0, dt)
    omega = max(float(x1[0]), 0.0)
    boost = min(max(float(x1[1]), 0.0), 1.0)
    if not (math.isfinite(omega) and math.isfinite(boost)):
        raise NonFiniteError("engine state became non-finite")
    torque = float(x1[2]) / dt
    info = EngineStepInfo(
        throttle=u,
        torque=torque,
        accel=(omega - state.omega) / dt,
        work=float(x1[3]),
        load_torque=load_torque,
    )
    return EngineState(omega, boost), info


def engine_step(spec: EngineSpec, state: EngineState, throttle: float, load_torque: float,
                dt: float) -> EngineState:
    return advance(spec, state, throttle, load_torque, dt)[0]


def is_stalled(spec: EngineSpec, omega: float) -> bool:
    return omega < spec.stall_speed
