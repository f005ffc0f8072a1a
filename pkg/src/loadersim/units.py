"""Unit-suffixed quantity parsing.  Everything is converted to SI on the way in."""

from __future__ import annotations

import math
import re

RPM = 2.0 * math.pi / 60.0  # rad/s per rpm

# suffix -> (dimension, factor to SI)
_UNITS: dict[str, tuple[str, float]] = {
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "rad/s": ("angular_speed", 1.0),
    "rpm": ("angular_speed", RPM),
    "rad/s2": ("angular_accel", 1.0),
    "rad/s^2": ("angular_accel", 1.0),
    "Nm": ("torque", 1.0),
    "N*m": ("torque", 1.0),
    "kNm": ("torque", 1e3),
    "N": ("force", 1.0),
    "kN": ("force", 1e3),
    "Pa": ("pressure", 1.0),
    "kPa": ("pressure", 1e3),
    "MPa": ("pressure", 1e6),
    "bar": ("pressure", 1e5),
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "m2": ("area", 1.0),
    "m^2": ("area", 1.0),
    "cm2": ("area", 1e-4),
    "m3/rev": ("displacement", 1.0),
    "cm3/rev": ("displacement", 1e-6),
    "cc/rev": ("displacement", 1e-6),
    "m3/s": ("flow", 1.0),
    "l/min": ("flow", 1e-3 / 60.0),
    "kg": ("mass", 1.0),
    "t": ("mass", 1e3),
    "kg*m2": ("inertia", 1.0),
    "kgm2": ("inertia", 1.0),
    "kg*m^2": ("inertia", 1.0),
    "m/s": ("speed", 1.0),
    "km/h": ("speed", 1.0 / 3.6),
    "N/m": ("stiffness", 1.0),
    "N/m2": ("stiffness2", 1.0),
    "N/m^2": ("stiffness2", 1.0),
    "kg/m": ("fill_rate", 1.0),
    "1/(rad/s)": ("gain", 1.0),
    "Nm/(rad/s)^2": ("capacity", 1.0),
    "Nm/(rad/s)2": ("capacity", 1.0),
    "-": ("dimensionless", 1.0),
    "%": ("dimensionless", 0.01),
}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(text, dimension: str, field: str = "value") -> float:
    """Parse ``"1400 rpm"`` style strings into SI floats.

    A bare number is rejected unless the dimension is ``dimensionless``; unit
    suffixes must belong to the requested dimension.
    """
    if isinstance(text, bool):
        raise UnitError(f"{field}: expected a quantity, got {text!r}")
    if isinstance(text, (int, float)):
        if dimension == "dimensionless":
            return float(text)
        raise UnitError(f"{field}: missing unit suffix for {dimension} quantity {text!r}")
    m = _QTY.match(str(text))
    if not m:
        raise UnitError(f"{field}: cannot parse quantity {text!r}")
    number, unit = float(m.group(1)), m.group(2)
    if not unit:
        if dimension == "dimensionless":
            return number
        raise UnitError(f"{field}: missing unit suffix for {dimension} quantity {text!r}")
    if unit not in _UNITS:
        raise UnitError(f"{field}: unknown unit {unit!r}")
    dim, factor = _UNITS[unit]
    if dim != dimension:
        raise UnitError(f"{field}: unit {unit!r} is {dim}, expected {dimension}")
    return number * factor


def format_quantity(value: float, unit: str) -> str:
    dim, factor = _UNITS[unit]
    return f"{value / factor!r} {unit}"
