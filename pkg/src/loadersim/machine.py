"""The loader modules wired onto the scheduler, and the standard runs.

Execution order is fixed: operator, engine, driveline, hydraulics,
loading unit, environment.  The engine therefore sees the converter and
pump torques computed at the end of the previous step (one step of delay);
everything downstream of the engine sees this step's engine speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import driveline as dl
from . import engine as eng
from . import hydraulics as hyd
from . import loading_unit as lu
from .core import Scheduler, SimConfig, Trace, run
from .driveline import Direction
from .layout import MachineLayout, ReversalScenario, Scenario
from .loading_unit import BucketState, PileSpec
from .operator import (Controls, CycleMetrics, Observation, OperatorParams, OperatorState,
                       Phase, cycle_metrics, operator_step)

DUMP_RATE = 5000.0  # kg/s leaving the bucket while tilted forward


class OperatorModule:
    name = "operator"
    inputs = ("vehicle_speed", "payload", "depth", "lift_height", "position")
    outputs = {"throttle_target": "rad/s", "direction_request": "-", "lift_lever": "-",
               "tilt_lever": "-", "brake": "-", "phase": "-"}

    def __init__(self, params: OperatorParams, state: OperatorState | None = None,
                 controls: Controls | None = None):
        self.params = params
        self.state = state or OperatorState()
        self.controls = controls or Controls(params.idle_speed, Direction.N)

    def initial_outputs(self):
        return self._pack()

    def _pack(self):
        c = self.controls
        return {"throttle_target": c.throttle_target, "direction_request": int(c.direction_request),
                "lift_lever": c.lift_lever, "tilt_lever": c.tilt_lever, "brake": c.brake,
                "phase": int(self.state.phase)}

    def step(self, t, dt, inputs):
        obs = Observation(inputs["vehicle_speed"], inputs["payload"], inputs["depth"],
                          inputs["lift_height"], inputs["position"])
        self.state, self.controls = operator_step(self.params, self.state, obs, dt)
        return self._pack()


class FixedControlsModule(OperatorModule):
    """Stand-in operator holding constant controls (test rigs, bench-style runs)."""

    name = "operator"

    def __init__(self, controls: Controls, phase: Phase = Phase.Done):
        self.params = None
        self.state = OperatorState(phase)
        self.controls = controls

    def step(self, t, dt, inputs):
        return self._pack()


class EngineModule:
    name = "engine"
    inputs = ("throttle_target", "conv_pump_torque", "pump_torque")
    outputs = {"engine_speed": "rad/s", "boost": "-", "throttle": "-", "engine_torque": "N*m",
               "engine_accel": "rad/s^2", "tc_load": "N*m", "hyd_load": "N*m",
               "engine_power": "W", "tc_power": "W", "hyd_power": "W", "inertia_power": "W",
               "accessory_power": "W", "engine_work": "J", "stalled": "-", "stall_count": "-"}

    def __init__(self, spec: eng.EngineSpec, state: eng.EngineState):
        self.spec = spec
        self.state = state
        self.work = 0.0
        self.stalled = eng.is_stalled(spec, state.omega)
        self.stall_count = 0
        self.min_omega = state.omega

    def initial_outputs(self):
        return {"engine_speed": self.state.omega, "boost": self.state.boost,
                "stalled": float(self.stalled)}

    def step(self, t, dt, inputs):
        spec = self.spec
        w0 = self.state.omega
        throttle = eng.governor_throttle(spec, inputs["throttle_target"], w0)
        t_tc = inputs["conv_pump_torque"]
        t_hyd = inputs["pump_torque"]
        load = t_tc + t_hyd + spec.accessory_torque
        self.state, info = eng.advance(spec, self.state, throttle, load, dt)
        self.work += info.work
        stalled = eng.is_stalled(spec, self.state.omega)
        if stalled and not self.stalled:
            self.stall_count += 1
        self.stalled = stalled
        self.min_omega = min(self.min_omega, self.state.omega)
        wm = 0.5 * (w0 + self.state.omega)
        return {
            "engine_speed": self.state.omega, "boost": self.state.boost,
            "throttle": info.throttle, "engine_torque": info.torque, "engine_accel": info.accel,
            "tc_load": t_tc, "hyd_load": t_hyd,
            "engine_power": info.torque * wm, "tc_power": t_tc * wm, "hyd_power": t_hyd * wm,
            "inertia_power": spec.inertia_j * wm * info.accel,
            "accessory_power": spec.accessory_torque * wm,
            "engine_work": self.work, "stalled": float(stalled),
            "stall_count": float(self.stall_count),
        }


class DrivelineModule:
    name = "driveline"
    inputs = ("engine_speed", "direction_request", "brake", "pile_force_h")
    outputs = {"vehicle_speed": "m/s", "position": "m", "direction": "-", "shift_active": "-",
               "nu": "-", "turbine_speed": "rad/s", "conv_pump_torque": "N*m",
               "turbine_torque": "N*m", "traction_force": "N"}

    def __init__(self, layout: MachineLayout, state: dl.DrivelineState):
        self.conv = layout.converter
        self.tspec = layout.transmission
        self.vspec = layout.vehicle
        self.state = state
        self._last = self._torques(0.0)

    def _torques(self, omega_pump):
        s = self.state
        wt = dl.turbine_speed(self.vspec, self.tspec, s)
        if dl.torque_path_open(s):
            tp, tt = dl.converter_torques(self.conv, omega_pump, wt)
        else:
            tp, tt = 0.0, 0.0
        return wt, tp, tt

    def initial_outputs(self):
        s = self.state
        return {"vehicle_speed": s.v, "position": s.x, "direction": int(s.direction),
                "shift_active": float(s.shift_timer > 0)}

    def step(self, t, dt, inputs):
        omega_pump = inputs["engine_speed"]
        self.state = dl.request_shift(self.tspec, self.state, Direction.parse(inputs["direction_request"]))
        s = self.state
        wt, tp, tt = self._torques(omega_pump)
        fw = dl.wheel_force(self.vspec, self.tspec, s, tt)
        nu = dl.speed_ratio(omega_pump, wt) if dl.torque_path_open(s) else 0.0
        brake = inputs["brake"] * self.vspec.traction_limit
        self.state = dl.vehicle_step(self.vspec, self.tspec, s, tt, 0.0, dt, brake_force=brake,
                                     penetration_force=inputs["pile_force_h"])
        s = self.state
        return {"vehicle_speed": s.v, "position": s.x, "direction": int(s.direction),
                "shift_active": float(s.shift_timer > 0), "nu": nu, "turbine_speed": wt,
                "conv_pump_torque": tp, "turbine_torque": tt, "traction_force": fw}


class HydraulicsModule:
    name = "hydraulics"
    inputs = ("engine_speed", "lift_lever", "tilt_lever", "lift_load_force", "tilt_load_force")
    outputs = {"eps": "-", "p_sys": "Pa", "pump_torque": "N*m", "pump_flow": "m^3/s",
               "flow_demand": "m^3/s", "x_lift": "m", "x_tilt": "m", "lift_rate": "m/s",
               "pump_shaft_power": "W", "hydraulic_power": "W"}

    def __init__(self, layout: MachineLayout, state: hyd.HydraulicsState):
        self.pump = layout.pump
        self.lift = layout.lift_cylinder
        self.tilt = layout.tilt_cylinder
        self.state = state

    def initial_outputs(self):
        s = self.state
        return {"eps": s.eps, "p_sys": s.p_sys, "x_lift": s.x_lift, "x_tilt": s.x_tilt,
                "pump_torque": hyd.pump_torque(self.pump, s.eps, s.p_sys)}

    def step(self, t, dt, inputs):
        pump, s = self.pump, self.state
        w = inputs["engine_speed"]
        lift_cmd = min(max(inputs["lift_lever"], 0.0), 1.0)
        tilt_cmd = min(max(inputs["tilt_lever"], -1.0), 1.0)
        q_lift = lift_cmd * self.lift.q_max
        q_tilt = abs(tilt_cmd) * self.tilt.q_max
        demand = q_lift + q_tilt
        s = hyd.ls_control_step(pump, s, demand, w, dt)
        q = hyd.delivered_flow(pump, s.eps, w)
        x_lift, x_tilt = s.x_lift, s.x_tilt
        pressures = []
        if q_lift > 0:
            share = q * q_lift / demand
            x_lift, p = hyd.cylinder_step(pump, self.lift, x_lift, share,
                                          inputs["lift_load_force"], dt)
            pressures.append(p)
        if q_tilt > 0:
            share = q * q_tilt / demand
            retract = tilt_cmd < 0
            load = 0.0 if retract else inputs["tilt_load_force"]
            x_tilt, p = hyd.cylinder_step(pump, self.tilt, x_tilt, share, load, dt, retract=retract)
            pressures.append(p)
        p_sys = max(pressures) if pressures else pump.ls_margin
        lift_rate = (x_lift - s.x_lift) / dt
        self.state = replace(s, p_sys=p_sys, x_lift=x_lift, x_tilt=x_tilt)
        t_pump = hyd.pump_torque(pump, s.eps, p_sys)
        return {"eps": s.eps, "p_sys": p_sys, "pump_torque": t_pump, "pump_flow": q,
                "flow_demand": demand, "x_lift": x_lift, "x_tilt": x_tilt, "lift_rate": lift_rate,
                "pump_shaft_power": t_pump * w, "hydraulic_power": p_sys * q}


class LoadingUnitModule:
    name = "loading_unit"
    inputs = ("x_lift", "x_tilt", "payload", "pile_force_v")
    outputs = {"lift_load_force": "N", "tilt_load_force": "N", "lift_height": "m"}

    def __init__(self, layout: MachineLayout, x_lift: float, payload: float):
        self.linkage = layout.linkage
        self._init = (x_lift, payload)

    def _forces(self, x_lift, x_tilt, payload, fv):
        link = self.linkage
        return {"lift_load_force": lu.lift_load_force(link, x_lift, payload, fv),
                "tilt_load_force": lu.tilt_load_force(link, x_tilt, payload),
                "lift_height": link.lift_height(x_lift)}

    def initial_outputs(self):
        x_lift, payload = self._init
        return self._forces(x_lift, 0.0, payload, 0.0)

    def step(self, t, dt, inputs):
        return self._forces(inputs["x_lift"], inputs["x_tilt"], inputs["payload"],
                            inputs["pile_force_v"])


class EnvironmentModule:
    """Gravel pile and bucket contents.

    The pile lies on the first leg of the V-path only; once the operator is
    past the direction change the machine travels a different leg.
    """

    name = "environment"
    inputs = ("position", "tilt_lever", "phase")
    outputs = {"depth": "m", "payload": "kg", "pile_force_h": "N", "pile_force_v": "N",
               "payload_delivered": "kg"}

    def __init__(self, layout: MachineLayout, pile: PileSpec, x0: float, payload: float = 0.0):
        self.pile = pile
        self.linkage = layout.linkage
        self.bucket = BucketState(payload, lu.penetration_depth(pile, x0, payload))
        self.x_prev = x0
        self.delivered = 0.0

    def _pack(self):
        fh, fv = lu.pile_resistance(self.pile, self.bucket.depth)
        return {"depth": self.bucket.depth, "payload": self.bucket.payload,
                "pile_force_h": fh, "pile_force_v": fv, "payload_delivered": self.delivered}

    def initial_outputs(self):
        return self._pack()

    def step(self, t, dt, inputs):
        x = inputs["position"]
        tilt = inputs["tilt_lever"]
        advance = max(x - self.x_prev, 0.0)
        self.x_prev = x
        if inputs["phase"] <= Phase.RetreatReverse:
            self.bucket = lu.bucket_fill_step(self.pile, self.linkage, self.bucket, advance,
                                              tilt > 0.0, x)
        else:
            self.bucket = replace(self.bucket, depth=0.0)
        if tilt < 0.0 and self.bucket.payload > 0.0:
            out = min(self.bucket.payload, DUMP_RATE * dt)
            self.bucket = replace(self.bucket, payload=self.bucket.payload - out)
            self.delivered += out
        return self._pack()


@dataclass
class InitialConditions:
    omega: float
    boost: float = 0.0
    v: float = 0.0
    x: float = 0.0
    direction: Direction = Direction.N
    shift_timer: float = 0.0
    eps: float = 0.0
    x_lift: float = 0.0
    x_tilt: float = 0.0
    payload: float = 0.0
    operator_state: OperatorState = field(default_factory=OperatorState)


@dataclass
class Machine:
    scheduler: Scheduler
    modules: Mapping[str, object]

    def run(self, config: SimConfig, stop=None) -> Trace:
        return run(self.scheduler, config, stop=stop)


def assemble(layout: MachineLayout, pile: PileSpec, operator, init: InitialConditions) -> Machine:
    """Register the six loader modules in execution order."""
    ds = dl.DrivelineState(v=init.v, direction=init.direction, gear=0,
                           shift_timer=init.shift_timer, x=init.x)
    mods = {
        "operator": operator,
        "engine": EngineModule(layout.engine, eng.EngineState(init.omega, init.boost)),
        "driveline": DrivelineModule(layout, ds),
        "hydraulics": HydraulicsModule(layout, hyd.HydraulicsState(eps=init.eps, p_sys=layout.pump.ls_margin,
                                                                   x_lift=init.x_lift, x_tilt=init.x_tilt)),
        "loading_unit": LoadingUnitModule(layout, init.x_lift, init.payload),
        "environment": EnvironmentModule(layout, pile, init.x, init.payload),
    }
    sched = Scheduler()
    for m in mods.values():
        sched.register_module(m)
    # seed the converter port consistently with the initial speeds
    _, tp, _ = mods["driveline"]._torques(init.omega)
    sched.set_value("conv_pump_torque", tp)
    sched.check_wiring()
    return Machine(sched, mods)


def sim_config(scenario: Scenario, dt: float | None = None, t_end: float | None = None) -> SimConfig:
    return SimConfig(dt=scenario.dt if dt is None else dt,
                     t_end=scenario.t_end if t_end is None else t_end,
                     record_stride=scenario.record_stride)


def build_cycle(layout: MachineLayout, scenario: Scenario) -> Machine:
    params = scenario.operator
    init = InitialConditions(omega=params.idle_speed, x=0.0)
    return assemble(layout, scenario.pile, OperatorModule(params), init)


def _done(sched: Scheduler) -> bool:
    return sched.value("phase") >= Phase.Done


def run_cycle(layout: MachineLayout, scenario: Scenario, dt: float | None = None,
              stop_at_done: bool = True) -> tuple[Trace, CycleMetrics]:
    machine = build_cycle(layout, scenario)
    trace = machine.run(sim_config(scenario, dt), stop=_done if stop_at_done else None)
    return trace, cycle_metrics(trace)


def hydraulic_hold_torque(layout: MachineLayout, payload: float, x_lift: float,
                          omega: float, lift: bool) -> float:
    """Pump torque while lifting a loaded bucket at full lever and full displacement target."""
    if not lift:
        return 0.0
    pump = layout.pump
    force = lu.lift_load_force(layout.linkage, x_lift, payload)
    p = hyd.circuit_pressure(pump, layout.lift_cylinder.area_head, force)
    eps = hyd.displacement_target(pump, layout.lift_cylinder.q_max, omega)
    return hyd.pump_torque(pump, eps, p)


def equilibrium_throttle(spec: eng.EngineSpec, omega: float, load: float) -> float:
    """Throttle u (= settled boost) with u * available_torque(omega, u) = load, by bisection."""
    def f(u):
        return u * eng.available_torque(spec, omega, u) - load
    if f(1.0) <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ReversalResult:
    trace: Trace
    stall_events: int
    min_engine_speed: float
    stalled: bool


def build_reversal(layout: MachineLayout, scenario: ReversalScenario, pile: PileSpec,
                   params: OperatorParams, lift_during_reverse: bool = True) -> Machine:
    """Machine positioned at the moment forward is engaged while still rolling back.

    Bucket full, boom a third raised, engine at the scenario speed with the
    boost it settled to under the lifting load alone.  The operator starts in
    DirectionChange after the shift delay, with its speed target chosen so
    the governor holds the scenario speed under that load.
    """
    spec = layout.engine
    w = scenario.omega_engine
    payload = layout.linkage.max_payload
    x_lift = layout.lift_cylinder.stroke / 3.0
    t_pre = hydraulic_hold_torque(layout, payload, x_lift, w, lift_during_reverse)
    u0 = equilibrium_throttle(spec, w, t_pre + spec.accessory_torque)
    target = w + (u0 / spec.governor_gain if spec.governor_gain > 0 else 0.0)
    p = replace(params, reversal_time=scenario.reversal_time, throttle_drop_speed=target,
                lift_during_reverse=lift_during_reverse,
                shift_delay=min(params.shift_delay, 0.5 * scenario.reversal_time))
    x0 = pile.pile_face_x - 10.0
    op_state = OperatorState(Phase.DirectionChange, p.shift_delay, x0)
    lift = 1.0 if lift_during_reverse else 0.0
    op = OperatorModule(p, op_state, Controls(target, Direction.F, lift_lever=lift))
    eps0 = hyd.displacement_target(layout.pump, lift * layout.lift_cylinder.q_max, w)
    init = InitialConditions(omega=w, boost=u0, v=scenario.v_back, x=x0, direction=Direction.F,
                             shift_timer=0.0, eps=eps0, x_lift=x_lift, payload=payload,
                             operator_state=op_state)
    return assemble(layout, pile, op, init)


def run_reversal(layout: MachineLayout, scenario: ReversalScenario, pile: PileSpec,
                 params: OperatorParams, dt: float = 1e-3, record_stride: int = 10,
                 lift_during_reverse: bool = True) -> ReversalResult:
    machine = build_reversal(layout, scenario, pile, params, lift_during_reverse)
    config = SimConfig(dt=dt, t_end=scenario.reversal_time, record_stride=record_stride)
    trace = machine.run(config)
    eng_mod = machine.modules["engine"]
    return ReversalResult(trace, eng_mod.stall_count, eng_mod.min_omega, eng_mod.stall_count > 0)
