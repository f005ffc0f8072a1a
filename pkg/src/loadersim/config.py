"""YAML layout and scenario files.

Every value carries a unit suffix ("1400 rpm", "28 MPa"); bare numbers are
only accepted for dimensionless fields.  Tables are given either inline as
``{x: [...], y: [...]}`` lists of quantities, or as a path to a CSV file
relative to the YAML file.  Fields left out of a file fall back to the
nominal machine and scenario, so a layout file only has to state what
differs from the nominal design.
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any

import yaml

from .driveline import ConverterSpec, TransmissionSpec, VehicleSpec
from .engine import EngineSpec
from .hydraulics import CylinderSpec, PumpSpec
from .layout import LayoutError, MachineLayout, ReversalScenario, Scenario, nominal_layout, nominal_scenario
from .loading_unit import LinkageSpec, PileSpec
from .operator import OperatorParams
from .tables import Table, TableError, read_columns
from .units import RPM, UnitError, format_quantity, parse_quantity

# field -> (dimension, display unit) for scalar quantities
_ENGINE = {
    "inertia_j": ("inertia", "kg*m2"),
    "turbo_tau": ("time", "s"),
    "low_idle": ("angular_speed", "rpm"),
    "high_idle": ("angular_speed", "rpm"),
    "governor_gain": ("gain", "1/(rad/s)"),
    "stall_fraction": ("dimensionless", "-"),
    "accessory_torque": ("torque", "Nm"),
}
_TRANSMISSION = {"efficiency": ("dimensionless", "-"), "shift_lag": ("time", "s")}
_VEHICLE = {
    "mass": ("mass", "kg"),
    "wheel_radius": ("length", "m"),
    "rolling_coeff": ("dimensionless", "-"),
    "mu_traction": ("dimensionless", "-"),
}
_PUMP = {
    "d_max": ("displacement", "cm3/rev"),
    "tau_pump": ("time", "s"),
    "ls_margin": ("pressure", "MPa"),
    "p_relief": ("pressure", "MPa"),
    "mech_eff": ("dimensionless", "-"),
    "drive_ratio": ("dimensionless", "-"),
}
_CYLINDER = {
    "area_head": ("area", "cm2"),
    "area_rod": ("area", "cm2"),
    "stroke": ("length", "m"),
    "q_max": ("flow", "l/min"),
}
_LINKAGE = {"arm_equiv_mass": ("mass", "kg"), "max_payload": ("mass", "kg")}
_LINKAGE_TABLES = {
    "lift_ratio": ("length", "m", "dimensionless", "-"),
    "tilt_ratio": ("length", "m", "dimensionless", "-"),
    "lift_height": ("length", "m", "length", "m"),
}
_PILE = {
    "k0": ("force", "N"),
    "k1": ("stiffness", "N/m"),
    "k2": ("stiffness2", "N/m2"),
    "vert_frac": ("dimensionless", "-"),
    "fill_rate": ("fill_rate", "kg/m"),
    "pile_face_x": ("length", "m"),
}
_OPERATOR = {
    "reversal_time": ("time", "s"),
    "throttle_drop_speed": ("angular_speed", "rpm"),
    "work_speed": ("angular_speed", "rpm"),
    "idle_speed": ("angular_speed", "rpm"),
    "shift_delay": ("time", "s"),
    "contact_depth": ("length", "m"),
    "fill_payload": ("mass", "kg"),
    "dump_height": ("length", "m"),
    "retreat_distance": ("length", "m"),
    "receiver_distance": ("length", "m"),
    "fill_burst": ("time", "s"),
    "dump_time": ("time", "s"),
}
_REVERSAL = {
    "v_back": ("speed", "m/s"),
    "omega_engine": ("angular_speed", "rpm"),
    "reversal_time": ("time", "s"),
}
_SIM = {"dt": ("time", "s"), "t_end": ("time", "s")}


class ConfigError(LayoutError):
    pass


# --- dumping ---------------------------------------------------------------

def _q(value: float, unit: str):
    if unit == "-":
        return float(value)
    return format_quantity(value, unit)


def _table_dict(t: Table, xdim: str, xunit: str, ydim: str, yunit: str) -> dict:
    return {"x": [_q(v, xunit) for v in t.x], "y": [_q(v, yunit) for v in t.y]}


def _scalars(obj, schema: dict) -> dict:
    return {name: _q(getattr(obj, name), unit) for name, (_, unit) in schema.items()}


def layout_to_dict(layout: MachineLayout) -> dict:
    e = layout.engine
    c = layout.converter
    eng = _scalars(e, _ENGINE)
    eng["static_torque"] = _table_dict(e.static_torque, "angular_speed", "rpm", "torque", "Nm")
    eng["smoke_limit"] = _table_dict(e.smoke_limit, "dimensionless", "-", "dimensionless", "-")
    link = _scalars(layout.linkage, _LINKAGE)
    for name, (xd, xu, yd, yu) in _LINKAGE_TABLES.items():
        link[name] = _table_dict(getattr(layout.linkage, name), xd, xu, yd, yu)
    trans = _scalars(layout.transmission, _TRANSMISSION)
    trans["gear_ratios"] = [float(g) for g in layout.transmission.gear_ratios]
    return {
        "engine": eng,
        "converter": {
            "nu": [float(v) for v in c.nu_grid],
            "capacity": [_q(v, "Nm/(rad/s)^2") for v in c.capacity.y],
            "torque_ratio": [float(v) for v in c.torque_ratio.y],
            "scale": 1.0,
        },
        "transmission": trans,
        "vehicle": _scalars(layout.vehicle, _VEHICLE),
        "pump": _scalars(layout.pump, _PUMP),
        "lift_cylinder": _scalars(layout.lift_cylinder, _CYLINDER),
        "tilt_cylinder": _scalars(layout.tilt_cylinder, _CYLINDER),
        "linkage": link,
    }


def scenario_to_dict(scenario: Scenario) -> dict:
    op = _scalars(scenario.operator, _OPERATOR)
    op["lift_during_reverse"] = scenario.operator.lift_during_reverse
    rev = _scalars(scenario.reversal, _REVERSAL)
    rev["assume_max_hydraulics"] = scenario.reversal.assume_max_hydraulics
    sim = _scalars(scenario, _SIM)
    sim["record_stride"] = scenario.record_stride
    return {
        "pile": _scalars(scenario.pile, _PILE),
        "operator": op,
        "reversal": rev,
        "sim": sim,
        "screen": {"marginal_band": scenario.marginal_band},
    }


def write_yaml(path: str | Path, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)


# --- loading ---------------------------------------------------------------

def _merge(base: dict, override: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        path = f"{where}.{key}" if where else str(key)
        if key not in base:
            raise ConfigError(f"{path}: unknown field")
        if isinstance(base[key], dict) and isinstance(val, dict) and not _is_table(base[key]):
            out[key] = _merge(base[key], val, path)
        else:
            out[key] = val
    return out


def _is_table(d: dict) -> bool:
    return set(d) == {"x", "y"}


def _parse(value, dimension: str, field: str) -> float:
    try:
        return parse_quantity(value, dimension, field)
    except UnitError as exc:
        raise ConfigError(str(exc)) from None


def _parse_section(section: dict, schema: dict, prefix: str) -> dict:
    return {name: _parse(section[name], dim, f"{prefix}.{name}") for name, (dim, _) in schema.items()}


def _read_csv(path: Path, ncols: int, field: str) -> list[list[float]]:
    try:
        return read_columns(path, ncols)
    except (OSError, TableError) as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _csv_header(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip() and not line.lstrip().startswith("#"):
                return [h.strip() for h in line.split(",")]
    return []


def _table(value, xdim: str, ydim: str, field: str, root: Path, x_csv_factor: float = 1.0) -> Table:
    try:
        if isinstance(value, str):
            path = root / value
            x, y = _read_csv(path, 2, field)
            return Table([v * x_csv_factor for v in x], y)
        if isinstance(value, dict) and _is_table(value):
            xs = [_parse(v, xdim, f"{field}.x") for v in value["x"]]
            ys = [_parse(v, ydim, f"{field}.y") for v in value["y"]]
            return Table(xs, ys)
    except TableError as exc:
        raise ConfigError(f"{field}: {exc}") from None
    raise ConfigError(f"{field}: expected a CSV path or an {{x: [...], y: [...]}} mapping")


def _engine_table(value, root: Path) -> Table:
    field = "engine.static_torque"
    if isinstance(value, str):
        head = _csv_header(root / value) if (root / value).exists() else []
        unit = head[0] if head else ""
        factor = {"rpm": RPM, "rad/s": 1.0, "omega_rad_s": 1.0}.get(unit)
        if factor is None:
            raise ConfigError(f"{field}: CSV first column must be 'rpm' or 'rad/s', got {unit!r}")
        return _table(value, "", "", field, root, factor)
    return _table(value, "angular_speed", "torque", field, root)


def _converter(section: dict, root: Path) -> ConverterSpec:
    if "file" in section and section["file"]:
        nu, c, mu = _read_csv(root / section["file"], 3, "converter.file")
    else:
        nu = [_parse(v, "dimensionless", "converter.nu") for v in section["nu"]]
        c = [_parse(v, "capacity", "converter.capacity") for v in section["capacity"]]
        mu = [_parse(v, "dimensionless", "converter.torque_ratio") for v in section["torque_ratio"]]
    if not len(nu) == len(c) == len(mu):
        raise ConfigError("converter: nu, capacity and torque_ratio must have equal length")
    try:
        spec = ConverterSpec.from_columns(nu, c, mu)
    except TableError as exc:
        raise ConfigError(f"converter: {exc}") from None
    scale = _parse(section.get("scale", 1.0), "dimensionless", "converter.scale")
    if not scale > 0:
        raise ConfigError("converter.scale: must be > 0")
    return spec.scaled(scale) if scale != 1.0 else spec


def layout_from_dict(data: dict, root: str | Path = ".") -> MachineLayout:
    root = Path(root)
    base = layout_to_dict(nominal_layout())
    base["converter"]["file"] = None
    if not isinstance(data, dict):
        raise ConfigError("layout: top level must be a mapping")
    d = _merge(base, data)
    e = d["engine"]
    engine = EngineSpec(
        static_torque=_engine_table(e["static_torque"], root),
        smoke_limit=_table(e["smoke_limit"], "dimensionless", "dimensionless", "engine.smoke_limit", root),
        **_parse_section(e, _ENGINE, "engine"),
    )
    t = d["transmission"]
    ratios = t["gear_ratios"]
    if not isinstance(ratios, list):
        raise ConfigError("transmission.gear_ratios: expected a list")
    transmission = TransmissionSpec(
        gear_ratios=tuple(_parse(g, "dimensionless", "transmission.gear_ratios") for g in ratios),
        **_parse_section(t, _TRANSMISSION, "transmission"),
    )
    link = d["linkage"]
    linkage = LinkageSpec(
        **{name: _table(link[name], xd, yd, f"linkage.{name}", root)
           for name, (xd, _, yd, _) in _LINKAGE_TABLES.items()},
        **_parse_section(link, _LINKAGE, "linkage"),
    )
    layout = MachineLayout(
        engine=engine,
        converter=_converter(d["converter"], root),
        transmission=transmission,
        vehicle=VehicleSpec(**_parse_section(d["vehicle"], _VEHICLE, "vehicle")),
        pump=PumpSpec(**_parse_section(d["pump"], _PUMP, "pump")),
        lift_cylinder=CylinderSpec(**_parse_section(d["lift_cylinder"], _CYLINDER, "lift_cylinder")),
        tilt_cylinder=CylinderSpec(**_parse_section(d["tilt_cylinder"], _CYLINDER, "tilt_cylinder")),
        linkage=linkage,
    )
    return layout.validate()


def _flag(value, field: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{field}: expected true or false")
    return value


def scenario_from_dict(data: dict, layout: MachineLayout | None = None) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario: top level must be a mapping")
    d = _merge(scenario_to_dict(nominal_scenario()), data)
    op = d["operator"]
    operator = OperatorParams(lift_during_reverse=_flag(op["lift_during_reverse"], "operator.lift_during_reverse"),
                              **_parse_section(op, _OPERATOR, "operator"))
    rev = d["reversal"]
    reversal = ReversalScenario(
        assume_max_hydraulics=_flag(rev["assume_max_hydraulics"], "reversal.assume_max_hydraulics"),
        **_parse_section(rev, _REVERSAL, "reversal"))
    stride = d["sim"]["record_stride"]
    if isinstance(stride, bool) or not isinstance(stride, int):
        raise ConfigError("sim.record_stride: expected an integer")
    scenario = Scenario(
        pile=PileSpec(**_parse_section(d["pile"], _PILE, "pile")),
        operator=operator,
        reversal=reversal,
        record_stride=stride,
        marginal_band=_parse(d["screen"]["marginal_band"], "dimensionless", "screen.marginal_band"),
        **_parse_section(d["sim"], _SIM, "sim"),
    )
    return scenario.validate(layout)


def _load_yaml(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None


def load_layout(path: str | Path) -> MachineLayout:
    return layout_from_dict(_load_yaml(path), Path(path).parent)


def load_scenario(path: str | Path, layout: MachineLayout | None = None) -> Scenario:
    return scenario_from_dict(_load_yaml(path), layout)
