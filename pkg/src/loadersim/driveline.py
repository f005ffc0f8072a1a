"""Torque converter, F/N/R transmission with shift lag, and longitudinal vehicle.

The converter covers negative speed ratios: when forward is engaged while
the machine still rolls backwards the turbine is driven against its
direction, the slip exceeds stall, and so does the pump torque demand.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import Sequence

import numpy as np

from .tables import Table

G = 9.81
OMEGA_EPS = 1.0      # rad/s, below this the pump is treated as stopped
V_DEADBAND = 0.01    # m/s, rolling resistance/brake deadband


class Direction(IntEnum):
    R = -1
    N = 0
    F = 1

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, Direction):
            return value
        if isinstance(value, str):
            return cls[value.strip().upper()[:1]]
        return cls(int(round(value)))


@dataclass(frozen=True)
class ConverterSpec:
    nu_grid: tuple[float, ...]
    capacity: Table       # nu -> N*m/(rad/s)^2
    torque_ratio: Table   # nu -> turbine/pump torque

    @classmethod
    def from_columns(cls, nu: Sequence[float], c: Sequence[float], mu: Sequence[float]) -> "ConverterSpec":
        return cls(tuple(float(v) for v in nu), Table(nu, c), Table(nu, mu))

    def scaled(self, factor: float) -> "ConverterSpec":
        """Same characteristic with the capacity factor scaled (a bigger/smaller wheel set)."""
        return replace(self, capacity=self.capacity.scaled(factor))

    def validate(self) -> None:
        nu = self.nu_grid
        if tuple(self.capacity.x) != tuple(nu) or tuple(self.torque_ratio.x) != tuple(nu):
            raise ValueError("converter: capacity and torque_ratio must share nu_grid")
        if nu[0] > -1.0 or nu[-1] < 0.97:
            raise ValueError("converter.nu_grid: must span at least [-1, 0.97]")
        if min(self.capacity.y) <= 0:
            raise ValueError("converter.capacity: must be > 0 on the grid")
        if min(self.torque_ratio.y) < 0:
            raise ValueError("converter.torque_ratio: must be >= 0")
        if not self.torque_ratio.is_nonincreasing():
            raise ValueError("converter.torque_ratio: must be non-increasing in nu")
        worst = min_dissipation(self)
        if worst < 0:
            raise ValueError(f"converter: tables create power (min dissipation {worst:.6g} W)")


@dataclass(frozen=True)
class TransmissionSpec:
    gear_ratios: tuple[float, ...]   # overall turbine -> wheel
    efficiency: float
    shift_lag: float

    def validate(self) -> None:
        if not self.gear_ratios or min(self.gear_ratios) <= 0:
            raise ValueError("transmission.gear_ratios: must be a non-empty list of ratios > 0")
        if not 0 < self.efficiency <= 1:
            raise ValueError("transmission.efficiency: must lie in (0, 1]")
        if self.shift_lag < 0:
            raise ValueError("transmission.shift_lag: must be >= 0")


@dataclass(frozen=True)
class VehicleSpec:
    mass: float
    wheel_radius: float
    rolling_coeff: float
    mu_traction: float

    def validate(self) -> None:
        for name in ("mass", "wheel_radius", "rolling_coeff", "mu_traction"):
            if not getattr(self, name) > 0:
                raise ValueError(f"vehicle.{name}: must be > 0")
        if not self.rolling_coeff < self.mu_traction:
            raise ValueError("vehicle.rolling_coeff: must be below mu_traction")

    @property
    def traction_limit(self) -> float:
        return self.mu_traction * self.mass * G


@dataclass(frozen=True)
class DrivelineState:
    v: float = 0.0
    direction: Direction = Direction.N
    gear: int = 0
    shift_timer: float = 0.0
    x: float = 0.0   # position along the current path, m


def nominal_converter() -> ConverterSpec:
    # below nu = 0.2 the trend is carried on linearly down to nu = -1
    nu = [-1.0, -0.5, 0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.97]
    c = [0.055, 0.0475, 0.040, 0.037, 0.034, 0.030, 0.022, 0.014, 0.005]
    mu = [4.5, 3.5, 2.5, 2.1, 1.7, 1.35, 1.05, 0.98, 0.97]
    return ConverterSpec.from_columns(nu, c, mu)


def nominal_transmission() -> TransmissionSpec:
    return TransmissionSpec(gear_ratios=(60.0, 32.0), efficiency=0.9, shift_lag=0.3)


def nominal_vehicle() -> VehicleSpec:
    return VehicleSpec(mass=18000.0, wheel_radius=0.75, rolling_coeff=0.03, mu_traction=0.6)


def speed_ratio(omega_pump: float, omega_turbine: float) -> float:
    if omega_pump < OMEGA_EPS:
        return 0.0
    return omega_turbine / omega_pump


def converter_torques(spec: ConverterSpec, omega_pump: float, omega_turbine: float) -> tuple[float, float]:
    """Pump torque demand and turbine output torque, N*m.

    One-way model: between the top of the grid and coupling (nu = 1) the
    capacity fades linearly to zero, and nothing is transmitted beyond it.
    """
    if omega_pump <= 0.0:
        return 0.0, 0.0
    nu = speed_ratio(omega_pump, omega_turbine)
    top = spec.nu_grid[-1]
    nu_c = min(max(nu, spec.nu_grid[0]), top)
    cap = spec.capacity(nu_c)
    if nu > top:
        cap *= max(0.0, (1.0 - nu) / (1.0 - top)) if top < 1.0 else 0.0
    pump = cap * omega_pump * omega_pump
    return pump, spec.torque_ratio(nu_c) * pump


def dissipation(spec: ConverterSpec, omega_pump: float, nu: float) -> float:
    """Power lost in the converter at a given pump speed and speed ratio, W."""
    wt = nu * omega_pump
    tp, tt = converter_torques(spec, omega_pump, wt)
    return tp * omega_pump - tt * wt


def min_dissipation(spec: ConverterSpec, n: int = 200,
                    pump_speeds: Sequence[float] = (50.0, 150.0, 230.0)) -> float:
    nus = np.linspace(spec.nu_grid[0], spec.nu_grid[-1], n)
    return min(dissipation(spec, w, float(nu)) for w in pump_speeds for nu in nus)


def gear_ratio(tspec: TransmissionSpec, state: DrivelineState) -> float:
    return tspec.gear_ratios[state.gear]


def torque_path_open(state: DrivelineState) -> bool:
    return state.direction != Direction.N and state.shift_timer <= 0.0


def turbine_speed(vspec: VehicleSpec, tspec: TransmissionSpec, state: DrivelineState) -> float:
    """Turbine speed implied by vehicle speed; negative when rolling against the engaged direction.

    Returns 0 in neutral (the turbine is then unloaded, see ``torque_path_open``).
    """
    if state.direction == Direction.N:
        return 0.0
    return state.v * int(state.direction) * gear_ratio(tspec, state) / vspec.wheel_radius


def request_shift(tspec: TransmissionSpec, state: DrivelineState, new_direction) -> DrivelineState:
    new_direction = Direction.parse(new_direction)
    if new_direction == state.direction:
        return state
    timer = tspec.shift_lag if new_direction != Direction.N else 0.0
    return replace(state, direction=new_direction, shift_timer=timer)


def wheel_force(vspec: VehicleSpec, tspec: TransmissionSpec, state: DrivelineState,
                turbine_torque: float) -> float:
    """Traction force at the ground, clamped to the adhesion limit."""
    if not torque_path_open(state):
        return 0.0
    f = (turbine_torque * gear_ratio(tspec, state) * tspec.efficiency * int(state.direction)
         / vspec.wheel_radius)
    lim = vspec.traction_limit
    return min(max(f, -lim), lim)


def _resistive(force: float, v: float, net_other: float) -> float:
    """Coulomb-like resistance opposing motion; inside the deadband it holds the vehicle
    up to its magnitude instead of dithering."""
    if v > V_DEADBAND:
        return -force
    if v < -V_DEADBAND:
        return force
    return -min(max(net_other, -force), force)


def vehicle_step(vspec: VehicleSpec, tspec: TransmissionSpec, state: DrivelineState,
                 turbine_torque: float, external_long_force: float, dt: float,
                 brake_force: float = 0.0, penetration_force: float = 0.0) -> DrivelineState:
    """Advance vehicle speed and position by one step.

    ``external_long_force`` is a plain force, positive pushing backwards.
    Rolling resistance and brake act against the motion; within the
    +/-0.01 m/s deadband they only cancel whatever drives the vehicle.
    ``penetration_force`` (pile resistance) opposes forward motion or forward
    drive only, it never pushes the machine backwards.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    fw = wheel_force(vspec, tspec, state, turbine_torque)
    drive = fw - external_long_force
    if penetration_force > 0.0:
        if state.v > V_DEADBAND:
            drive -= penetration_force
        elif state.v >= -V_DEADBAND:
            drive -= min(penetration_force, max(drive, 0.0))
    resist = vspec.rolling_coeff * vspec.mass * G + max(brake_force, 0.0)
    fres = _resistive(resist, state.v, drive)
    a = (drive + fres) / vspec.mass
    v_new = state.v + a * dt
    # resistance alone must not reverse the direction of travel
    if fres != 0.0 and state.v != 0.0 and np.sign(v_new) != np.sign(state.v):
        if abs(drive) <= resist:
            v_new = 0.0
    x_new = state.x + 0.5 * (state.v + v_new) * dt
    timer = max(state.shift_timer - dt, 0.0)
    return replace(state, v=v_new, x=x_new, shift_timer=timer)
