import math

import pytest

from loadersim.tables import Table, TableError, read_columns, write_columns
from loadersim.units import RPM, UnitError, format_quantity, parse_quantity


def test_table_interpolates_and_clamps():
    t = Table([0.0, 1.0, 2.0], [0.0, 10.0, 30.0])
    assert t(0.5) == 5.0
    assert t(1.5) == 20.0
    assert t(-1.0) == 0.0
    assert t(9.0) == 30.0


@pytest.mark.parametrize("x, y", [([0.0], [1.0]), ([0.0, 0.0], [1.0, 2.0]), ([0.0, 1.0], [1.0, math.nan])])
def test_table_rejects_bad_grids(x, y):
    with pytest.raises(TableError):
        Table(x, y)


def test_columns_round_trip(tmp_path):
    p = tmp_path / "t.csv"
    write_columns(p, ["a", "b"], [[1.0, 2.5], [3.0, 4.0]], comment="meta")
    assert p.read_text().splitlines()[0] == "# meta"
    assert read_columns(p, 2) == [[1.0, 2.5], [3.0, 4.0]]


def test_columns_require_header(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,2\n3,4\n")
    with pytest.raises(TableError, match="header"):
        read_columns(p, 2)


def test_parse_quantities():
    assert parse_quantity("1400 rpm", "angular_speed") == pytest.approx(1400 * RPM)
    assert parse_quantity("20 MPa", "pressure") == 20e6
    assert parse_quantity("250 bar", "pressure") == 25e6
    assert parse_quantity("100 cm3/rev", "displacement") == pytest.approx(1e-4)
    assert parse_quantity("300 l/min", "flow") == pytest.approx(5e-3)
    assert parse_quantity("18 t", "mass") == 18000.0
    assert parse_quantity(0.9, "dimensionless") == 0.9
    assert parse_quantity("15 %", "dimensionless") == pytest.approx(0.15)


@pytest.mark.parametrize("text, dim", [("20", "pressure"), (20, "pressure"), ("20 furlongs", "length"),
                                       ("20 MPa", "length"), ("fast", "speed"), (True, "dimensionless")])
def test_parse_rejects(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim, "field")


def test_error_names_field():
    with pytest.raises(UnitError, match="pump.p_relief"):
        parse_quantity("28", "pressure", "pump.p_relief")


def test_format_round_trip():
    s = format_quantity(1400 * RPM, "rpm")
    assert parse_quantity(s, "angular_speed") == pytest.approx(1400 * RPM, rel=1e-15)
