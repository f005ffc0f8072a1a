"""Reversal-phase torque budget and the static balance report.

The budget is the quick check run before any full simulation: with the
machine still rolling back when forward is engaged, add the converter pump
demand at the resulting negative speed ratio to the worst-case hydraulic
pump demand, and compare the sum with the engine torque at that speed.
Demand above the static curve is a sure failure.  Demand comfortably
inside the dynamic curve (measured on the bench at the reversal
acceleration rate) is a pass.  Anything else needs the full simulation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

from . import hydraulics as hyd
from .bench import DynamicCurve, default_run, forced_runup, reversal_accel_rate
from .driveline import converter_torques
from .layout import MachineLayout, ReversalScenario
from .loading_unit import lift_load_force


class Verdict(str, Enum):
    Feasible = "Feasible"
    Marginal = "Marginal"
    Infeasible = "Infeasible"

    @property
    def rank(self) -> int:
        return {"Infeasible": 0, "Marginal": 1, "Feasible": 2}[self.value]

    @property
    def exit_code(self) -> int:
        return {"Feasible": 0, "Marginal": 1, "Infeasible": 2}[self.value]


class CurveCoverageError(ValueError):
    pass


@dataclass(frozen=True)
class TorqueBudgetReport:
    omega_engine: float
    t_tc_demand: float
    t_hyd_demand: float
    t_static_avail: float
    t_dynamic_avail: float
    margin_static: float
    margin_dynamic: float
    marginal_band: float
    dynamic_accel: float
    verdict: Verdict

    @property
    def demand(self) -> float:
        return self.t_tc_demand + self.t_hyd_demand

    def as_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "TorqueBudgetReport",
    "type": "object",
    "required": ["omega_engine", "t_tc_demand", "t_hyd_demand", "t_static_avail",
                 "t_dynamic_avail", "margin_static", "margin_dynamic", "marginal_band",
                 "dynamic_accel", "verdict"],
    "properties": {
        "omega_engine": {"type": "number"},
        "t_tc_demand": {"type": "number", "minimum": 0},
        "t_hyd_demand": {"type": "number", "minimum": 0},
        "t_static_avail": {"type": "number", "minimum": 0},
        "t_dynamic_avail": {"type": "number"},
        "margin_static": {"type": "number"},
        "margin_dynamic": {"type": "number"},
        "marginal_band": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "dynamic_accel": {"type": "number"},
        "verdict": {"enum": ["Feasible", "Marginal", "Infeasible"]},
    },
    "additionalProperties": False,
}


def reversal_turbine_speed(layout: MachineLayout, scenario: ReversalScenario) -> float:
    # lowest forward gear: largest multiplication, hence the worst demand
    ratio = layout.transmission.gear_ratios[0]
    return scenario.v_back * ratio / layout.vehicle.wheel_radius


def reversal_tc_demand(layout: MachineLayout, scenario: ReversalScenario) -> float:
    w_t = reversal_turbine_speed(layout, scenario)
    return converter_torques(layout.converter, scenario.omega_engine, w_t)[0]


def worst_case_hydraulic_demand(layout: MachineLayout, scenario: ReversalScenario) -> float:
    pump = layout.pump
    if scenario.assume_max_hydraulics:
        return hyd.pump_torque(pump, 1.0, pump.p_relief)
    # full bucket at the boom position with the largest mechanical advantage
    link = layout.linkage
    x_worst = link.lift_ratio.x[max(range(len(link.lift_ratio.y)), key=link.lift_ratio.y.__getitem__)]
    force = lift_load_force(link, x_worst, link.max_payload)
    p = hyd.circuit_pressure(pump, layout.lift_cylinder.area_head, force)
    return hyd.pump_torque(pump, 1.0, p)


def reversal_bench_curve(layout: MachineLayout, scenario: ReversalScenario,
                         samples: int = 100) -> DynamicCurve:
    """Bench run-up at the acceleration rate implied by the reversal time."""
    accel = reversal_accel_rate(layout.engine, scenario.reversal_time)
    return forced_runup(layout.engine, default_run(layout.engine, accel, samples))


def torque_budget_verdict(omega_engine: float, t_tc: float, t_hyd: float, t_static: float,
                          dynamic_curve: DynamicCurve, marginal_band: float = 0.15) -> TorqueBudgetReport:
    if not 0 < marginal_band < 1:
        raise ValueError("marginal_band must lie in (0, 1)")
    if not dynamic_curve.covers(omega_engine):
        raise CurveCoverageError(
            f"dynamic curve covers {dynamic_curve.omega_start:.2f}..{dynamic_curve.omega_end:.2f} rad/s, "
            f"not {omega_engine:.2f} rad/s; run the bench over a matching range")
    t_dyn = dynamic_curve(omega_engine)
    demand = t_tc + t_hyd
    if demand > t_static:
        verdict = Verdict.Infeasible
    elif demand <= (1.0 - marginal_band) * t_dyn:
        verdict = Verdict.Feasible
    else:
        verdict = Verdict.Marginal
    return TorqueBudgetReport(
        omega_engine=omega_engine, t_tc_demand=t_tc, t_hyd_demand=t_hyd,
        t_static_avail=t_static, t_dynamic_avail=t_dyn,
        margin_static=t_static - demand, margin_dynamic=t_dyn - demand,
        marginal_band=marginal_band, dynamic_accel=dynamic_curve.accel, verdict=verdict)


def screen(layout: MachineLayout, scenario: ReversalScenario, dynamic_curve: DynamicCurve | None = None,
           marginal_band: float = 0.15) -> TorqueBudgetReport:
    """Full reversal-phase check; runs the bench if no curve is supplied."""
    if dynamic_curve is None:
        dynamic_curve = reversal_bench_curve(layout, scenario)
    w = scenario.omega_engine
    return torque_budget_verdict(
        w, reversal_tc_demand(layout, scenario), worst_case_hydraulic_demand(layout, scenario),
        layout.engine.static_torque(w), dynamic_curve, marginal_band)


@dataclass(frozen=True)
class BalanceTargets:
    traction: float = 0.0     # N
    lift_force: float = 0.0   # N
    lift_time: float = math.inf  # s, pass when computed time <= target


def static_balance_report(layout: MachineLayout, targets: BalanceTargets) -> dict:
    """First-loop static sizing numbers compared against product targets."""
    eng = layout.engine
    conv = layout.converter
    tr = layout.transmission
    veh = layout.vehicle
    pump = layout.pump
    cyl = layout.lift_cylinder
    w_mt = eng.max_torque_speed
    traction_conv = (conv.torque_ratio(0.0) * conv.capacity(0.0) * w_mt ** 2
                     * tr.gear_ratios[0] * tr.efficiency / veh.wheel_radius)
    traction = min(traction_conv, veh.traction_limit)
    lift_force = (pump.p_relief - pump.ls_margin) * cyl.area_head / layout.linkage.r_min
    n_rated = eng.rated_speed * pump.drive_ratio / (2.0 * math.pi)
    lift_time = cyl.stroke * cyl.area_head / (pump.d_max * n_rated)
    return {
        "max_traction_N": {"value": traction, "target": targets.traction,
                           "converter_limited_N": traction_conv, "adhesion_limit_N": veh.traction_limit,
                           "pass": traction >= targets.traction},
        "max_lift_force_N": {"value": lift_force, "target": targets.lift_force,
                             "pass": lift_force >= targets.lift_force},
        "lift_time_s": {"value": lift_time, "target": targets.lift_time,
                        "pass": lift_time <= targets.lift_time},
    }
