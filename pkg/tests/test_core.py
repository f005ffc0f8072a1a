import math

import numpy as np
import pytest

from loadersim.core import (NonFiniteError, RegistrationError, Scheduler, SimConfig, SimulationError,
                            Trace, integrate, run)
from loadersim.machine import build_cycle


class Const:
    """Produces fixed values; reads nothing."""

    def __init__(self, name, values, inputs=()):
        self.name = name
        self.outputs = {k: "-" for k in values}
        self.inputs = tuple(inputs)
        self._values = dict(values)

    def initial_outputs(self):
        return dict(self._values)

    def step(self, t, dt, inputs):
        return dict(self._values)


class Decay:
    """x' = -k x, integrated with RK4."""

    name = "decay"
    inputs = ("k",)
    outputs = {"x": "-"}

    def __init__(self, x0):
        self.x = x0

    def initial_outputs(self):
        return {"x": self.x}

    def step(self, t, dt, inputs):
        k = inputs["k"]
        self.x = float(integrate(lambda s, _t: -k * s, [self.x], t, dt)[0])
        return {"x": self.x}


def test_first_registration_gets_id_zero():
    s = Scheduler()
    mid = s.register_module(Const("engine", {"engine_torque_out": 1.0, "engine_speed": 2.0}))
    assert mid == 0
    assert s.port("engine_speed").producer == 0
    assert s.value("engine_torque_out") == 1.0


def test_duplicate_producer_rejected():
    s = Scheduler()
    s.register_module(Const("engine", {"engine_torque_out": 1.0, "engine_speed": 2.0}))
    with pytest.raises(RegistrationError, match="duplicate producer: engine_speed"):
        s.register_module(Const("other", {"engine_speed": 3.0}))


def test_loader_assembly_order(layout, scenario):
    machine = build_cycle(layout, scenario)
    order = machine.scheduler.order
    assert order == ["operator", "engine", "driveline", "hydraulics", "loading_unit", "environment"]
    ids = {machine.scheduler.port(p).producer for p in machine.scheduler.values()}
    assert ids == set(range(6))


def test_missing_producer_detected():
    s = Scheduler()
    s.register_module(Decay(1.0))
    with pytest.raises(RegistrationError, match="'k'"):
        s.check_wiring()


def test_steady_state_is_fixed_point():
    s = Scheduler()
    s.register_module(Const("src", {"k": 0.0}))
    s.register_module(Decay(3.0))
    before = s.values()
    s.step_all(0.0, 1e-3)
    after = s.values()
    for k in before:
        assert abs(after[k] - before[k]) <= 1e-12


def test_nan_injection_names_port_and_time():
    s = Scheduler()
    s.register_module(Const("src", {"k": 1.0}))
    s.register_module(Decay(1.0))
    s.step_all(0.0, 1e-3)
    s.set_value("k", float("nan"))
    with pytest.raises(NonFiniteError) as info:
        s.step_all(0.5, 1e-3)
    assert info.value.port in ("k", "x")
    assert info.value.t == 0.5
    assert "t=0.5" in str(info.value)


def test_undeclared_write_rejected():
    class Rogue(Const):
        def step(self, t, dt, inputs):
            return {"other": 1.0}

    s = Scheduler()
    s.register_module(Const("a", {"other": 0.0}))
    s.register_module(Rogue("b", {"mine": 0.0}))
    with pytest.raises(RegistrationError, match="undeclared"):
        s.step_all(0.0, 1e-3)


def test_undeclared_read_rejected():
    class Peek(Const):
        def step(self, t, dt, inputs):
            return {"y": inputs["k"]}

    s = Scheduler()
    s.register_module(Const("a", {"k": 1.0}))
    s.register_module(Peek("b", {"y": 0.0}))
    with pytest.raises(KeyError, match="did not declare"):
        s.step_all(0.0, 1e-3)


def test_integrate_trivial_cases():
    assert integrate(lambda x, t: np.zeros_like(x), [5.0], 0.0, 0.1)[0] == 5.0
    assert integrate(lambda x, t: np.ones_like(x), [0.0], 0.0, 0.001)[0] == pytest.approx(0.001, abs=1e-15)


def test_integrate_exponential_decay():
    x = integrate(lambda x, t: -x, [1.0], 0.0, 0.1)[0]
    assert abs(x - math.exp(-0.1)) < 1e-7


def test_integrate_reports_bad_index():
    with pytest.raises(NonFiniteError) as info:
        integrate(lambda x, t: np.array([0.0, np.inf]), [1.0, 1.0], 0.0, 0.1)
    assert info.value.index == 1


def test_run_records_stride_and_stop():
    def build():
        s = Scheduler()
        s.register_module(Const("src", {"k": 1.0}))
        s.register_module(Decay(1.0))
        return s

    tr = run(build(), SimConfig(dt=0.01, t_end=1.0, record_stride=10))
    assert len(tr) == 11
    assert tr.column("t")[-1] == pytest.approx(1.0)
    assert tr.column("x")[-1] == pytest.approx(math.exp(-1.0), abs=1e-9)
    stopped = run(build(), SimConfig(dt=0.01, t_end=1.0, record_stride=10),
                  stop=lambda s: s.value("x") < 0.9)
    x = stopped.column("x")
    assert x[-1] < 0.9 <= x[-2]


def test_repeated_runs_bit_identical(tmp_path):
    def once(path):
        s = Scheduler()
        s.register_module(Const("src", {"k": 0.7}))
        s.register_module(Decay(2.0))
        run(s, SimConfig(dt=1e-3, t_end=0.5, record_stride=7)).write_csv(path)
        return path.read_bytes()

    assert once(tmp_path / "a.csv") == once(tmp_path / "b.csv")


def test_trace_rejects_time_going_backwards():
    tr = Trace(["t", "x"])
    tr.append(0.0, {"x": 1.0})
    with pytest.raises(SimulationError):
        tr.append(0.0, {"x": 1.0})


@pytest.mark.parametrize("kwargs", [{"dt": 0.0}, {"dt": 1.0, "t_end": 0.5}, {"record_stride": 0}])
def test_sim_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimConfig(**kwargs)
