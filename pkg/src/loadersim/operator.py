"""Rule-based operator for one short loading cycle (V-cycle), plus cycle metrics.

The operator is a finite state machine driven by timers and threshold
checks on the true machine state.  Phases only ever advance:

    ApproachPile -> Fill -> RetreatReverse -> DirectionChange
        -> ApproachReceiver -> Dump -> ReturnReverse -> Done
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Mapping

import numpy as np

from .driveline import Direction
from .units import RPM


class Phase(IntEnum):
    ApproachPile = 0
    Fill = 1
    RetreatReverse = 2
    DirectionChange = 3
    ApproachReceiver = 4
    Dump = 5
    ReturnReverse = 6
    Done = 7


class OperatorError(RuntimeError):
    pass


class IncompleteTraceError(ValueError):
    pass


@dataclass(frozen=True)
class OperatorParams:
    reversal_time: float = 2.0
    lift_during_reverse: bool = True
    throttle_drop_speed: float = 1000 * RPM
    work_speed: float = 2200 * RPM
    idle_speed: float = 800 * RPM
    shift_delay: float = 0.3          # s between dropping the throttle and selecting forward
    contact_depth: float = 0.05       # m
    fill_payload: float = 4500.0      # kg
    dump_height: float = 3.2          # m
    retreat_distance: float = 5.0     # m backed out from where filling ended
    receiver_distance: float = 4.0    # m forward from the reversal point
    fill_burst: float = 0.5           # s per tilt/lift burst
    dump_time: float = 1.5            # s

    def validate(self) -> None:
        for name in ("reversal_time", "throttle_drop_speed", "work_speed", "idle_speed",
                     "contact_depth", "fill_payload", "dump_height", "retreat_distance",
                     "receiver_distance", "fill_burst", "dump_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"operator.{name}: must be > 0")
        if self.shift_delay < 0 or self.shift_delay >= self.reversal_time:
            raise ValueError("operator.shift_delay: must lie in [0, reversal_time)")


@dataclass(frozen=True)
class OperatorState:
    phase: Phase = Phase.ApproachPile
    phase_timer: float = 0.0
    mark: float = 0.0        # position remembered at the last phase change of interest


@dataclass(frozen=True)
class Controls:
    throttle_target: float
    direction_request: Direction
    lift_lever: float = 0.0
    tilt_lever: float = 0.0
    brake: float = 0.0


@dataclass(frozen=True)
class Observation:
    v: float
    payload: float
    depth: float
    lift_height: float
    position: float

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "Observation":
        return cls(m["v"], m["payload"], m["depth"], m["lift_height"], m["position"])


def _enter(state: OperatorState, phase: Phase, mark: float | None = None) -> OperatorState:
    return OperatorState(phase, 0.0, state.mark if mark is None else mark)


def _next_phase(p: OperatorParams, s: OperatorState, obs: Observation) -> OperatorState:
    ph = s.phase
    if ph == Phase.ApproachPile:
        if obs.depth > p.contact_depth:
            return _enter(s, Phase.Fill)
    elif ph == Phase.Fill:
        if obs.payload >= p.fill_payload:
            return _enter(s, Phase.RetreatReverse, obs.position)
    elif ph == Phase.RetreatReverse:
        if obs.position <= s.mark - p.retreat_distance:
            return _enter(s, Phase.DirectionChange, obs.position)
    elif ph == Phase.DirectionChange:
        if s.phase_timer >= p.reversal_time:
            return _enter(s, Phase.ApproachReceiver)
    elif ph == Phase.ApproachReceiver:
        if obs.lift_height >= p.dump_height and obs.position >= s.mark + p.receiver_distance:
            return _enter(s, Phase.Dump)
    elif ph == Phase.Dump:
        if s.phase_timer >= p.dump_time:
            return _enter(s, Phase.ReturnReverse)
    elif ph == Phase.ReturnReverse:
        if obs.position <= s.mark:
            return _enter(s, Phase.Done)
    elif ph == Phase.Done:
        pass
    else:
        raise OperatorError(f"unknown operator phase {ph!r}")
    return s


def controls_for(p: OperatorParams, s: OperatorState, obs: Observation) -> Controls:
    ph = s.phase
    if ph == Phase.ApproachPile:
        return Controls(p.work_speed, Direction.F)
    if ph == Phase.Fill:
        # alternate tilt-back and lift bursts while crowding forward
        k = int(math.floor(s.phase_timer / p.fill_burst + 1e-9)) % 2
        return Controls(p.work_speed, Direction.F,
                        lift_lever=1.0 if k == 1 else 0.0,
                        tilt_lever=1.0 if k == 0 else 0.0)
    lift = 1.0 if p.lift_during_reverse else 0.0
    if ph == Phase.RetreatReverse:
        return Controls(p.work_speed, Direction.R, lift_lever=lift)
    if ph == Phase.DirectionChange:
        direction = Direction.F if s.phase_timer >= p.shift_delay else Direction.R
        return Controls(p.throttle_drop_speed, direction, lift_lever=lift)
    if ph == Phase.ApproachReceiver:
        lift = 1.0 if obs.lift_height < p.dump_height else 0.0
        if obs.position >= s.mark + p.receiver_distance:
            return Controls(p.work_speed, Direction.N, lift_lever=lift, brake=1.0)
        return Controls(p.work_speed, Direction.F, lift_lever=lift)
    if ph == Phase.Dump:
        return Controls(p.work_speed, Direction.N, tilt_lever=-1.0, brake=1.0)
    if ph == Phase.ReturnReverse:
        return Controls(p.work_speed, Direction.R)
    if ph == Phase.Done:
        return Controls(p.idle_speed, Direction.N, brake=1.0)
    raise OperatorError(f"unknown operator phase {ph!r}")


def operator_step(params: OperatorParams, state: OperatorState, obs: Observation,
                  dt: float) -> tuple[OperatorState, Controls]:
    """Advance the timer, take at most one transition, and emit this step's controls."""
    vals = (obs.v, obs.payload, obs.depth, obs.lift_height, obs.position)
    if not all(math.isfinite(v) for v in vals):
        raise OperatorError(f"non-finite observation {obs!r}")
    try:
        phase = Phase(state.phase)
    except ValueError:
        raise OperatorError(f"unknown operator phase {state.phase!r}") from None
    state = replace(state, phase=phase, phase_timer=state.phase_timer + dt)
    state = _next_phase(params, state, obs)
    return state, controls_for(params, state, obs)


@dataclass(frozen=True)
class CycleMetrics:
    cycle_time: float | None
    fuel_proxy: float
    payload_delivered: float
    stall_events: int
    complete: bool

    def as_dict(self) -> dict:
        return {
            "cycle_time_s": self.cycle_time,
            "fuel_proxy_J": self.fuel_proxy,
            "payload_delivered_kg": self.payload_delivered,
            "stall_events": self.stall_events,
            "complete": self.complete,
        }


def count_rising_edges(flags) -> int:
    f = np.asarray(flags, dtype=float) > 0.5
    if f.size == 0:
        return 0
    return int(f[0]) + int(np.count_nonzero(f[1:] & ~f[:-1]))


def cycle_metrics(trace) -> CycleMetrics:
    """Summarise a machine trace.

    ``fuel_proxy`` is the crank work, read from the engine's cumulative work
    column.  Stall events come from the engine's per-step stall counter, so
    short stalls between recorded rows are not lost.
    """
    if trace is None or len(trace) == 0:
        raise IncompleteTraceError("empty trace: cycle incomplete")
    cols = trace.as_dict()
    t = cols["t"]
    phase = cols["phase"]
    done = np.flatnonzero(phase >= Phase.Done)
    cycle_time = float(t[done[0]]) if done.size else None
    return CycleMetrics(
        cycle_time=cycle_time,
        fuel_proxy=float(cols["engine_work"][-1]),
        payload_delivered=float(cols["payload_delivered"][-1]),
        stall_events=int(round(cols["stall_count"][-1])),
        complete=bool(done.size),
    )
