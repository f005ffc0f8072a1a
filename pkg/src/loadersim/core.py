"""Fixed-step master scheduler, port registry, RK4 integrator and trace recorder.

Modules talk to each other only through named ports.  Each module declares
the ports it reads and the ports it produces; the scheduler refuses to start
unless every consumed port has exactly one producer.  Modules run once per
step in registration order, reading the shared port store in place, so a
module sees values written earlier in the same step and the previous step's
value for everything produced later in the order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np


class SimulationError(RuntimeError):
    """Base class for errors raised by the simulation kernel."""


class RegistrationError(SimulationError):
    pass


class NonFiniteError(SimulationError):
    """A port or derivative became NaN/inf."""

    def __init__(self, message: str, module: str | None = None,
                 port: str | None = None, t: float | None = None,
                 index: int | None = None):
        super().__init__(message)
        self.module = module
        self.port = port
        self.t = t
        self.index = index


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 60.0
    record_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.t_end >= self.dt:
            raise ValueError(f"t_end must be >= dt, got {self.t_end}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be an integer >= 1, got {self.record_stride}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Port:
    name: str
    value: float
    unit: str
    producer: int


class Module(Protocol):
    """What the scheduler needs from a simulation module."""

    name: str
    inputs: Sequence[str]
    outputs: Mapping[str, str]  # port name -> unit tag

    def initial_outputs(self) -> Mapping[str, float]: ...

    def step(self, t: float, dt: float, inputs: Mapping[str, float]) -> Mapping[str, float]: ...


def integrate(derivative: Callable[[np.ndarray, float], np.ndarray],
              state: Sequence[float] | np.ndarray, t: float, dt: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of ``dx/dt = derivative(x, t)``.

    Raises NonFiniteError (with the offending component index) if any stage
    derivative is NaN or infinite.
    """
    x = np.asarray(state, dtype=float)

    def f(xs, ts):
        d = np.asarray(derivative(xs, ts), dtype=float)
        bad = np.flatnonzero(~np.isfinite(d))
        if bad.size:
            i = int(bad[0])
            raise NonFiniteError(f"non-finite derivative at index {i} (t={ts})", t=ts, index=i)
        return d

    k1 = f(x, t)
    k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _InputView(Mapping[str, float]):
    """Read-only window on the port store limited to a module's declared inputs."""

    def __init__(self, ports: dict[str, Port], allowed: frozenset[str], module: str):
        self._ports = ports
        self._allowed = allowed
        self._module = module

    def __getitem__(self, key: str) -> float:
        if key not in self._allowed:
            raise KeyError(f"module {self._module!r} did not declare input port {key!r}")
        return self._ports[key].value

    def __iter__(self):
        return iter(self._allowed)

    def __len__(self):
        return len(self._allowed)


class Scheduler:
    """Registry of modules and their ports plus the sequential stepping loop."""

    def __init__(self):
        self._modules: list[Module] = []
        self._ports: dict[str, Port] = {}
        self._views: list[_InputView] = []
        self._checked = False

    @property
    def modules(self) -> list[Module]:
        return list(self._modules)

    @property
    def order(self) -> list[str]:
        return [m.name for m in self._modules]

    def register_module(self, module: Module) -> int:
        for name in module.outputs:
            if name in self._ports:
                raise RegistrationError(f"duplicate producer: {name}")
        mid = len(self._modules)
        init = dict(module.initial_outputs())
        for name, unit in module.outputs.items():
            self._ports[name] = Port(name, float(init.get(name, 0.0)), unit, mid)
        self._modules.append(module)
        self._views.append(_InputView(self._ports, frozenset(module.inputs), module.name))
        self._checked = False
        return mid

    def port(self, name: str) -> Port:
        return self._ports[name]

    def value(self, name: str) -> float:
        return self._ports[name].value

    def values(self) -> dict[str, float]:
        return {k: p.value for k, p in self._ports.items()}

    def set_value(self, name: str, value: float) -> None:
        """Overwrite a port value (initial conditions, fault injection in tests)."""
        self._ports[name].value = float(value)

    def check_wiring(self) -> None:
        missing = [(m.name, p) for m in self._modules for p in m.inputs if p not in self._ports]
        if missing:
            mod, p = missing[0]
            raise RegistrationError(f"input port {p!r} of module {mod!r} has no producer")
        self._checked = True

    def step_all(self, t: float, dt: float) -> None:
        if not self._checked:
            self.check_wiring()
        # values set from outside (initial conditions, fault injection) are checked first
        for port in self._ports.values():
            if not math.isfinite(port.value):
                raise NonFiniteError(
                    f"non-finite value in port {port.name!r} at t={t:.6g}",
                    module=self._modules[port.producer].name, port=port.name, t=t)
        for mid, module in enumerate(self._modules):
            out = module.step(t, dt, self._views[mid])
            for name, val in out.items():
                port = self._ports.get(name)
                if port is None or port.producer != mid:
                    raise RegistrationError(
                        f"module {module.name!r} wrote undeclared port {name!r}")
                val = float(val)
                if not math.isfinite(val):
                    raise NonFiniteError(
                        f"non-finite value in port {name!r} after module {module.name!r} at t={t:.6g}",
                        module=module.name, port=name, t=t)
                port.value = val


@dataclass
class Trace:
    """Recorded rows; the column set is fixed when the first row is added."""

    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def append(self, t: float, values: Mapping[str, float]) -> None:
        if self.rows and not t > self.rows[-1][0]:
            raise SimulationError(f"trace time not increasing: {t} after {self.rows[-1][0]}")
        self.rows.append([t] + [float(values[c]) for c in self.columns[1:]])

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def as_dict(self) -> dict[str, np.ndarray]:
        arr = np.array(self.rows, dtype=float).reshape(len(self.rows), len(self.columns))
        return {c: arr[:, i] for i, c in enumerate(self.columns)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(v) for v in r])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(self.to_csv())


def run(scheduler: Scheduler, config: SimConfig, columns: Iterable[str] | None = None,
        stop: Callable[[Scheduler], bool] | None = None, t0: float = 0.0) -> Trace:
    """Step the scheduler from t0 to t_end, recording every ``record_stride`` steps.

    Row k holds the port values at the end of step k*stride (the initial state
    is row 0).  ``stop`` is checked after each step; a run that stops early
    always records its final row.
    """
    scheduler.check_wiring()
    cols = ["t"] + list(columns if columns is not None else scheduler.values().keys())
    trace = Trace(cols)
    trace.append(t0, scheduler.values())
    dt = config.dt
    for k in range(1, config.n_steps + 1):
        t_prev = t0 + (k - 1) * dt
        scheduler.step_all(t_prev, dt)
        t = t0 + k * dt
        done = stop is not None and stop(scheduler)
        if k % config.record_stride == 0 or done:
            trace.append(t, scheduler.values())
        if done:
            break
    return trace
