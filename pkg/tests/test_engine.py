import math
from dataclasses import replace

import numpy as np
import pytest

from loadersim import engine as eng
from loadersim.tables import Table
from loadersim.units import RPM


@pytest.fixture
def spec():
    return eng.nominal_engine()


def test_nominal_table_shape(spec):
    assert len(spec.static_torque.x) == 6
    assert max(spec.static_torque.y) == 1200.0
    assert spec.max_torque_speed == pytest.approx(1400 * RPM)
    assert spec.low_idle == pytest.approx(800 * RPM)
    assert spec.stall_speed == pytest.approx(0.8 * 800 * RPM)
    spec.validate()


def test_full_boost_gives_static_torque(spec):
    for w in np.linspace(50, 250, 17):
        assert eng.available_torque(spec, w, 1.0) == spec.static_torque(w)


def test_zero_boost_smoke_limited():
    s = replace(eng.nominal_engine(), static_torque=Table([100.0, 150.0, 200.0], [800.0, 1000.0, 900.0]))
    assert eng.available_torque(s, 150.0, 0.0) == pytest.approx(400.0, abs=1e-12)


def test_speed_below_grid_clamps(spec):
    w_min = spec.static_torque.x[0]
    assert eng.available_torque(spec, 0.5 * w_min, 0.3) == spec.static_torque(w_min) * spec.smoke_limit(0.3)


def test_governor(spec):
    assert eng.governor_throttle(spec, 150.0, 150.0) == 0.0
    assert eng.governor_throttle(spec, 230.0, 80.0) == 1.0
    s = replace(spec, governor_gain=0.05)
    assert eng.governor_throttle(s, 110.0, 100.0) == pytest.approx(0.5)


def test_low_idle_protection(spec):
    w = spec.low_idle - 5.0
    assert eng.protected_throttle(spec, 0.0, w) == pytest.approx(spec.governor_gain * 5.0)
    assert eng.protected_throttle(spec, 0.0, spec.low_idle + 1.0) == 0.0


def test_equilibrium_is_held(spec):
    w0, u = 150.0, 0.6
    load = u * eng.available_torque(spec, w0, u)
    st = eng.EngineState(w0, u)
    for _ in range(200):
        st, _ = eng.advance(spec, st, u, load, 1e-3)
    assert st.omega == pytest.approx(w0, abs=1e-9)
    assert st.boost == pytest.approx(u, abs=1e-12)


def test_free_runup_monotone(spec):
    st = eng.EngineState(spec.low_idle, 0.0)
    prev_w, prev_b = st.omega, st.boost
    for _ in range(500):
        st, _ = eng.advance(spec, st, 1.0, 0.0, 1e-3)
        assert st.omega > prev_w
        assert st.boost >= prev_b
        prev_w, prev_b = st.omega, st.boost
    assert st.boost <= 1.0


def test_boost_decay_matches_exponential(spec):
    st = eng.EngineState(spec.high_idle, 1.0)
    for _ in range(500):
        st, _ = eng.advance(spec, st, 0.0, 0.0, 1e-3)
    assert abs(st.boost - math.exp(-1.0)) < 1e-4


def test_step_info_energy_consistent(spec):
    st = eng.EngineState(120.0, 0.5)
    new, info = eng.advance(spec, st, 1.0, 300.0, 1e-3)
    # J * dw = (T - load) * dt by construction of the averaged torque
    assert spec.inertia_j * info.accel == pytest.approx(info.torque - 300.0, rel=1e-9)


def test_stall_flag(spec):
    assert eng.is_stalled(spec, 0.79 * spec.low_idle)
    assert not eng.is_stalled(spec, 0.81 * spec.low_idle)


@pytest.mark.parametrize("change, field", [
    ({"low_idle": 3000 * RPM}, "low_idle"),
    ({"inertia_j": 0.0}, "inertia_j"),
    ({"smoke_limit": Table([0.0, 1.0], [0.4, 0.9])}, "smoke_limit"),
])
def test_validation_names_field(spec, change, field):
    with pytest.raises(ValueError, match=f"engine.{field}"):
        replace(spec, **change).validate()
