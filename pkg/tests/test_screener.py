import math
from dataclasses import replace

import numpy as np
import pytest

from loadersim import hydraulics as hyd
from loadersim.bench import default_run, forced_runup
from loadersim.driveline import converter_torques
from loadersim.layout import ReversalScenario
from loadersim.screener import (REPORT_SCHEMA, BalanceTargets, CurveCoverageError, Verdict, reversal_tc_demand,
                                screen, static_balance_report, torque_budget_verdict,
                                worst_case_hydraulic_demand)
from loadersim.units import RPM


@pytest.fixture(scope="module")
def curve(layout):
    return forced_runup(layout.engine, default_run(layout.engine, 31.4))


def test_tc_demand_matches_converter(layout):
    sc = ReversalScenario(v_back=-1.5, omega_engine=120.0)
    w_t = -1.5 * layout.transmission.gear_ratios[0] / layout.vehicle.wheel_radius
    assert reversal_tc_demand(layout, sc) == converter_torques(layout.converter, 120.0, w_t)[0]


def test_tc_demand_limits(layout):
    w = 120.0
    near = reversal_tc_demand(layout, ReversalScenario(v_back=-1e-12, omega_engine=w))
    assert near == pytest.approx(layout.converter.capacity(0.0) * w * w, rel=1e-9)
    prev = near
    for v in np.linspace(-0.1, -3.0, 20):
        d = reversal_tc_demand(layout, ReversalScenario(v_back=float(v), omega_engine=w))
        assert d >= prev
        prev = d


def test_hydraulic_worst_case(layout):
    sc = ReversalScenario()
    assert worst_case_hydraulic_demand(layout, sc) == hyd.pump_torque(layout.pump, 1.0, layout.pump.p_relief)
    half = layout.with_relief(0.5 * layout.pump.p_relief)
    assert worst_case_hydraulic_demand(half, sc) == pytest.approx(0.5 * worst_case_hydraulic_demand(layout, sc))
    relaxed = replace(sc, assume_max_hydraulics=False)
    assert 0 < worst_case_hydraulic_demand(layout, relaxed) <= worst_case_hydraulic_demand(layout, sc)


def test_verdicts(curve):
    w = 100.0
    static = 1000.0
    dyn = curve(w)
    assert torque_budget_verdict(w, 800.0, 300.0, static, curve).verdict is Verdict.Infeasible
    zero = torque_budget_verdict(w, 0.0, 0.0, static, curve)
    assert zero.verdict is Verdict.Feasible
    assert zero.margin_static == static and zero.margin_dynamic == dyn
    mid = 0.5 * ((1 - 0.15) * dyn + static)
    assert torque_budget_verdict(w, mid, 0.0, static, curve).verdict is Verdict.Marginal


def test_band_edges(curve):
    w = 150.0
    dyn = curve(w)
    edge = (1 - 0.15) * dyn
    assert torque_budget_verdict(w, edge, 0.0, 2000.0, curve).verdict is Verdict.Feasible
    assert torque_budget_verdict(w, edge * (1 + 1e-9), 0.0, 2000.0, curve).verdict is Verdict.Marginal
    with pytest.raises(ValueError):
        torque_budget_verdict(w, 0.0, 0.0, 2000.0, curve, marginal_band=0.0)


def test_uncovered_speed_rejected(curve):
    with pytest.raises(CurveCoverageError, match="bench"):
        torque_budget_verdict(curve.omega_end + 10.0, 0.0, 0.0, 1000.0, curve)


def test_report_fields_and_schema(layout):
    rep = screen(layout, ReversalScenario())
    d = rep.as_dict()
    assert set(d) == set(REPORT_SCHEMA["required"]) == set(REPORT_SCHEMA["properties"])
    assert d["margin_static"] == pytest.approx(d["t_static_avail"] - d["t_tc_demand"] - d["t_hyd_demand"])
    assert d["verdict"] in REPORT_SCHEMA["properties"]["verdict"]["enum"]
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(d, REPORT_SCHEMA)


def test_nominal_is_not_infeasible(layout, scenario):
    assert screen(layout, scenario.reversal).verdict is Verdict.Marginal


def test_balance_zero_targets_pass(layout):
    rep = static_balance_report(layout, BalanceTargets())
    assert all(v["pass"] for v in rep.values())


def test_balance_adhesion_clamp(layout):
    big = layout.with_converter_scale(10.0)
    target = 1.01 * layout.vehicle.traction_limit
    assert not static_balance_report(big, BalanceTargets(traction=target))["max_traction_N"]["pass"]


def test_balance_nominal_hand_values(layout):
    rep = static_balance_report(layout, BalanceTargets())
    # 2.5 * 0.04 * (1400 rpm)^2 * 60 * 0.9 / 0.75 = 154.76 kN, clamped at 0.6*18000*9.81
    assert rep["max_traction_N"]["converter_limited_N"] == pytest.approx(154756.5, rel=1e-5)
    assert rep["max_traction_N"]["value"] == pytest.approx(105948.0, rel=1e-9)
    # (28 - 2) MPa * 145 cm2 / 4.0
    assert rep["max_lift_force_N"]["value"] == pytest.approx(94250.0, rel=1e-12)
    # rated power at 1800 rpm -> 30 rev/s; 0.9 m * 145 cm2 / (100 cm3 * 30)
    assert rep["lift_time_s"]["value"] == pytest.approx(4.35, rel=1e-12)
