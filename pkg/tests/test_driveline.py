from dataclasses import replace

import numpy as np
import pytest

from loadersim import driveline as dl
from loadersim.driveline import Direction, DrivelineState
from loadersim.layout import ReversalScenario
from loadersim.machine import run_reversal
from loadersim.units import RPM


@pytest.fixture
def conv():
    return dl.nominal_converter()


@pytest.fixture
def trans():
    return dl.nominal_transmission()


@pytest.fixture
def veh():
    return dl.nominal_vehicle()


def test_zero_pump_speed(conv):
    assert dl.converter_torques(conv, 0.0, 0.0) == (0.0, 0.0)
    assert dl.converter_torques(conv, 0.0, -10.0) == (0.0, 0.0)


def test_rollback_raises_demand(conv):
    w = 120.0
    assert dl.converter_torques(conv, w, -0.3 * w)[0] > dl.converter_torques(conv, w, 0.0)[0]


def test_stall_point_hand_arithmetic(conv):
    tp, tt = dl.converter_torques(conv, 150.0, 0.0)
    assert tp == pytest.approx(900.0, abs=1e-9)
    assert tt == pytest.approx(900.0 * conv.torque_ratio(0.0), abs=1e-9)


def test_no_torque_at_coupling(conv):
    assert dl.converter_torques(conv, 150.0, 150.0) == (0.0, 0.0)
    assert dl.converter_torques(conv, 150.0, 200.0) == (0.0, 0.0)


def test_nominal_dissipation_nonnegative(conv):
    for w in (50.0, 150.0, 230.0):
        for nu in np.linspace(-1.0, 0.97, 200):
            assert dl.dissipation(conv, w, float(nu)) >= 0.0


def test_power_creating_table_rejected(conv):
    bad = dl.ConverterSpec.from_columns(conv.nu_grid, conv.capacity.y,
                                        [4.5, 3.5, 2.5, 2.1, 1.7, 1.6, 1.5, 1.3, 1.2])
    with pytest.raises(ValueError, match="converter"):
        bad.validate()


def test_rest_stays_at_rest(veh, trans):
    st = DrivelineState(v=0.0, direction=Direction.F)
    for _ in range(100):
        st = dl.vehicle_step(veh, trans, st, 0.0, 0.0, 1e-3)
    assert st.v == 0.0
    assert st.x == 0.0


def test_traction_clamp(veh, trans):
    st = DrivelineState(v=2.0, direction=Direction.F)
    assert dl.wheel_force(veh, trans, st, 1e6) == veh.traction_limit
    new = dl.vehicle_step(veh, trans, st, 1e6, 0.0, 1e-3)
    a = (veh.traction_limit - veh.rolling_coeff * veh.mass * dl.G) / veh.mass
    assert (new.v - st.v) / 1e-3 == pytest.approx(a, rel=1e-9)


def test_constant_force_kinematics(veh, trans):
    rolling = veh.rolling_coeff * veh.mass * dl.G
    st = DrivelineState(v=1.0, direction=Direction.N)
    for _ in range(100):
        st = dl.vehicle_step(veh, trans, st, 0.0, -(18000.0 + rolling), 1e-3)
    assert st.v - 1.0 == pytest.approx(0.1, abs=1e-9)
    # trapezoidal position for constant acceleration is exact
    assert st.x == pytest.approx(1.0 * 0.1 + 0.5 * 1.0 * 0.1 ** 2, abs=1e-9)


def test_turbine_speed_signs(veh, trans):
    assert dl.turbine_speed(veh, trans, DrivelineState(v=0.0, direction=Direction.F)) == 0.0
    assert dl.turbine_speed(veh, trans, DrivelineState(v=-1.0, direction=Direction.F)) == pytest.approx(-80.0)
    assert dl.turbine_speed(veh, trans, DrivelineState(v=-1.0, direction=Direction.R)) == pytest.approx(80.0)


def test_shift_timer(veh, trans):
    st = DrivelineState(v=-1.0, direction=Direction.R)
    st = dl.request_shift(trans, st, Direction.F)
    assert st.direction == Direction.F and st.shift_timer == trans.shift_lag
    assert not dl.torque_path_open(st)
    again = dl.request_shift(trans, st, Direction.F)
    assert again is st
    for _ in range(int(round(trans.shift_lag / 1e-3))):
        st = dl.vehicle_step(veh, trans, st, 0.0, 0.0, 1e-3)
    assert dl.torque_path_open(st)


def test_reversal_exercises_negative_speed_ratio(layout, scenario):
    res = run_reversal(layout, scenario.reversal, scenario.pile, scenario.operator, record_stride=10)
    nu = res.trace.column("nu")
    assert (nu < 0).any()


@pytest.mark.parametrize("change, field", [
    ({"mass": 0.0}, "mass"), ({"mu_traction": 0.01}, "rolling_coeff"),
])
def test_vehicle_validation(veh, change, field):
    with pytest.raises(ValueError, match=f"vehicle.{field}"):
        replace(veh, **change).validate()
