"""Load-sensing variable displacement pump feeding lift and tilt cylinders.

Pressure is quasi-static: the highest loaded active circuit plus the LS
margin, capped by the relief valve.  The pump strokes toward the
displacement that meets the demanded flow at the current shaft speed,
with a first-order response lag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .core import integrate

TWO_PI = 2.0 * math.pi
MIN_PUMP_REV = 1.0  # rev/s, below this any demand asks for full displacement


@dataclass(frozen=True)
class PumpSpec:
    d_max: float        # m^3/rev
    tau_pump: float     # s
    ls_margin: float    # Pa
    p_relief: float     # Pa
    mech_eff: float
    drive_ratio: float = 1.0

    def validate(self) -> None:
        for name in ("d_max", "tau_pump", "ls_margin", "p_relief", "mech_eff", "drive_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pump.{name}: must be > 0")
        if self.mech_eff > 1:
            raise ValueError("pump.mech_eff: must be <= 1")
        if self.ls_margin >= self.p_relief:
            raise ValueError("pump.ls_margin: must be below p_relief")


@dataclass(frozen=True)
class CylinderSpec:
    area_head: float    # m^2
    area_rod: float     # m^2, annulus on the rod side
    stroke: float       # m
    q_max: float        # m^3/s demanded at full lever

    def validate(self, name: str = "cylinder") -> None:
        if not 0 < self.area_rod < self.area_head:
            raise ValueError(f"{name}.area_rod: need 0 < area_rod < area_head")
        if not self.stroke > 0:
            raise ValueError(f"{name}.stroke: must be > 0")
        if not self.q_max > 0:
            raise ValueError(f"{name}.q_max: must be > 0")


@dataclass(frozen=True)
class HydraulicsState:
    eps: float = 0.0
    p_sys: float = 0.0
    x_lift: float = 0.0
    x_tilt: float = 0.0


def nominal_pump() -> PumpSpec:
    return PumpSpec(d_max=1.0e-4, tau_pump=0.1, ls_margin=2.0e6, p_relief=28.0e6,
                    mech_eff=0.9, drive_ratio=1.0)


def nominal_lift_cylinder() -> CylinderSpec:
    # two 96 mm bore lift cylinders (60 mm rods) acting together
    return CylinderSpec(area_head=0.0145, area_rod=0.0088, stroke=0.9, q_max=5.0e-3)


def nominal_tilt_cylinder() -> CylinderSpec:
    return CylinderSpec(area_head=0.0177, area_rod=0.0100, stroke=0.6, q_max=3.0e-3)


def pump_rev_rate(spec: PumpSpec, omega_engine: float) -> float:
    return max(omega_engine, 0.0) * spec.drive_ratio / TWO_PI


def pump_torque(spec: PumpSpec, eps: float, p_sys: float) -> float:
    """Shaft torque the pump demands, referred to the engine crank."""
    return eps * spec.d_max * p_sys / (TWO_PI * spec.mech_eff) * spec.drive_ratio


def displacement_target(spec: PumpSpec, flow_demand: float, omega_engine: float) -> float:
    n = pump_rev_rate(spec, omega_engine)
    if flow_demand <= 0.0:
        return 0.0
    if n < MIN_PUMP_REV:
        return 1.0
    return min(max(flow_demand / (spec.d_max * n), 0.0), 1.0)


def ls_control_step(spec: PumpSpec, state: HydraulicsState, flow_demand: float,
                    omega_engine: float, dt: float) -> HydraulicsState:
    target = displacement_target(spec, flow_demand, omega_engine)
    eps = float(integrate(lambda x, t: (target - x) / spec.tau_pump, [state.eps], 0.0, dt)[0])
    return replace(state, eps=min(max(eps, 0.0), 1.0))


def delivered_flow(spec: PumpSpec, eps: float, omega_engine: float) -> float:
    return eps * spec.d_max * pump_rev_rate(spec, omega_engine)


def circuit_pressure(spec: PumpSpec, area: float, load_force: float) -> float:
    return min(max(load_force, 0.0) / area + spec.ls_margin, spec.p_relief)


def cylinder_step(spec: PumpSpec, cyl: CylinderSpec, x: float, delivered: float,
                  load_force: float, dt: float, retract: bool = False) -> tuple[float, float]:
    """New extension and circuit pressure for one cylinder.

    Extending works against ``load_force`` on the head side; ``retract``
    feeds the rod side (e.g. dumping the bucket).  At relief the flow dumps
    over the valve and the rod does not move.  Flow into an end stop is ignored.
    """
    area = cyl.area_rod if retract else cyl.area_head
    p = circuit_pressure(spec, area, load_force)
    if p >= spec.p_relief or delivered <= 0.0:
        return x, p
    rate = delivered / area
    x_new = x - rate * dt if retract else x + rate * dt
    return min(max(x_new, 0.0), cyl.stroke), p
