import math
from dataclasses import replace

import pytest

from loadersim import hydraulics as hyd


@pytest.fixture
def pump():
    return hyd.nominal_pump()


def test_pump_torque_proportional(pump):
    assert hyd.pump_torque(pump, 0.0, 20e6) == 0.0
    assert hyd.pump_torque(pump, 0.7, 20e6) == pytest.approx(2 * hyd.pump_torque(pump, 0.7, 10e6), rel=1e-15)


def test_pump_torque_hand_arithmetic(pump):
    p = replace(pump, d_max=2e-4, mech_eff=0.9, drive_ratio=1.0)
    assert hyd.pump_torque(p, 1.0, 2e7) == pytest.approx(4000.0 / (2 * math.pi * 0.9), rel=1e-12)
    assert hyd.pump_torque(p, 1.0, 2e7) == pytest.approx(707.4, abs=0.05)


def test_displacement_decays_without_demand(pump):
    st = hyd.HydraulicsState(eps=0.8)
    for _ in range(50):
        new = hyd.ls_control_step(pump, st, 0.0, 150.0, 1e-3)
        assert new.eps < st.eps
        st = new


def test_low_speed_high_demand_goes_to_max(pump):
    assert hyd.displacement_target(pump, 5e-3, 85.0) == 1.0
    assert hyd.displacement_target(pump, 5e-3, 0.0) == 1.0
    st = hyd.ls_control_step(pump, hyd.HydraulicsState(eps=0.2), 5e-3, 85.0, 1e-3)
    assert st.eps > 0.2


def test_displacement_first_order_response(pump):
    st = hyd.HydraulicsState(eps=0.0)
    for _ in range(100):
        st = hyd.ls_control_step(pump, st, 1.0, 150.0, 1e-3)
    assert abs(st.eps - (1.0 - math.exp(-1.0))) < 1e-4


def test_zero_flow_holds_position(pump):
    cyl = hyd.nominal_lift_cylinder()
    x, p = hyd.cylinder_step(pump, cyl, 0.3, 0.0, 1e5, 1e-3)
    assert x == 0.3
    assert p == min(1e5 / cyl.area_head + pump.ls_margin, pump.p_relief)


def test_relief_stops_motion(pump):
    cyl = hyd.nominal_lift_cylinder()
    force = pump.p_relief * cyl.area_head
    x, p = hyd.cylinder_step(pump, cyl, 0.3, 1e-3, force, 1e-3)
    assert p == pump.p_relief and x == 0.3


def test_extension_hand_arithmetic(pump):
    cyl = hyd.CylinderSpec(area_head=0.02, area_rod=0.01, stroke=1.0, q_max=0.01)
    x = 0.0
    for _ in range(1000):
        x, _ = hyd.cylinder_step(pump, cyl, x, 0.002, 1e4, 1e-3)
    assert x == pytest.approx(0.1, abs=1e-12)


def test_validation_names_relief(pump):
    with pytest.raises(ValueError, match="pump.p_relief"):
        replace(pump, p_relief=0.0).validate()
