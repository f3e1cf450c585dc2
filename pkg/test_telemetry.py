"""Telemetry CSV ingestion, windowing and energy integration."""

from datetime import timedelta

import pytest

from conftest import T0, hourly
from modules.errors import InvalidWindow, ParseError, ValidationError
from modules.telemetry import (
    SensorKind,
    energy_kwh,
    format_timestamp,
    load_telemetry,
    mean_value,
    power_kw,
    resolve_sensors,
    telemetry_span,
    window,
    write_telemetry,
)

HEADER = "timestamp,sensor_id,kind,value,unit\n"


@pytest.fixture
def csv_file(tmp_path):
    def write(body: str, header: str = HEADER):
        path = tmp_path / "telemetry.csv"
        path.write_text(header + body, encoding="utf-8")
        return path
    return write


class TestLoad:
    def test_groups_and_sorts_by_sensor(self, csv_file):
        path = csv_file(
            "2024-01-01T01:00:00Z,amb-1,temperature_f,73,F\n"
            "2024-01-01T00:00:00Z,amb-1,temperature_f,72,F\n"
            "2024-01-01T00:00:00Z,it-kw,power_kw,100,kW\n"
        )
        data = load_telemetry(path)
        assert sorted(data) == ["amb-1", "it-kw"]
        assert list(data["amb-1"].values()) == [72.0, 73.0]
        assert data["it-kw"].kind is SensorKind.POWER_KW

    def test_celsius_converted_to_fahrenheit(self, csv_file):
        path = csv_file("2024-01-01T00:00:00Z,amb-1,temperature_f,20,C\n")
        assert load_telemetry(path)["amb-1"].values()[0] == pytest.approx(68.0)

    def test_header_only_file_is_empty_telemetry(self, csv_file):
        assert load_telemetry(csv_file("")) == {}

    def test_bad_timestamp_reports_line(self, csv_file):
        path = csv_file(
            "2024-01-01T00:00:00Z,amb-1,temperature_f,72,F\n"
            "yesterday,amb-1,temperature_f,72,F\n"
        )
        with pytest.raises(ParseError) as exc:
            load_telemetry(path)
        assert exc.value.line == 3
        assert exc.value.field == "timestamp"

    def test_line_numbers_count_blank_lines(self, csv_file):
        path = csv_file(
            "2024-01-01T00:00:00Z,amb-1,temperature_f,72,F\n"
            "\n"
            "2024-01-01T01:00:00Z,amb-1,temperature_f,hot,F\n"
        )
        with pytest.raises(ParseError) as exc:
            load_telemetry(path)
        assert exc.value.line == 4

    def test_blank_lines_are_ignored(self, csv_file):
        path = csv_file(
            "2024-01-01T00:00:00Z,amb-1,temperature_f,72,F\n"
            "\n"
            "2024-01-01T01:00:00Z,amb-1,temperature_f,73,F\n"
            "\n"
        )
        assert list(load_telemetry(path)["amb-1"].values()) == [72.0, 73.0]

    def test_bad_value_reports_line(self, csv_file):
        path = csv_file("2024-01-01T00:00:00Z,amb-1,temperature_f,warm,F\n")
        with pytest.raises(ParseError) as exc:
            load_telemetry(path)
        assert exc.value.line == 2
        assert exc.value.field == "value"

    def test_unknown_kind(self, csv_file):
        path = csv_file("2024-01-01T00:00:00Z,x,humidity,40,%\n")
        with pytest.raises(ParseError, match="unknown kind 'humidity'"):
            load_telemetry(path)

    def test_wrong_header(self, csv_file):
        path = csv_file("", header="time,sensor,value\n")
        with pytest.raises(ParseError, match="expected header"):
            load_telemetry(path)

    def test_unit_must_match_kind(self, csv_file):
        path = csv_file("2024-01-01T00:00:00Z,it-kw,power_kw,100,cfm\n")
        with pytest.raises(ValidationError, match="unit 'cfm' does not match kind 'power_kw'"):
            load_telemetry(path)

    def test_repeated_timestamp_is_rejected(self, csv_file):
        path = csv_file(
            "2024-01-01T00:00:00Z,amb-1,temperature_f,72,F\n"
            "2024-01-01T00:00:00Z,amb-1,temperature_f,73,F\n"
        )
        with pytest.raises(ValidationError, match="non-monotonic timestamps"):
            load_telemetry(path)

    def test_utilization_range(self, csv_file):
        path = csv_file("2024-01-01T00:00:00Z,cpu,cpu_utilization_pct,140,%\n")
        with pytest.raises(ValidationError, match="outside"):
            load_telemetry(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="does not exist"):
            load_telemetry(tmp_path / "absent.csv")

    def test_write_then_load(self, telemetry, tmp_path):
        path = write_telemetry(telemetry, tmp_path / "t.csv")
        assert load_telemetry(path) == telemetry


class TestWindow:
    def test_bounds_are_inclusive(self):
        s = hourly("x", SensorKind.TEMPERATURE_F, range(10))
        w = window(s, T0 + timedelta(hours=2), T0 + timedelta(hours=5))
        assert list(w.values()) == [2.0, 3.0, 4.0, 5.0]

    def test_start_after_end(self):
        s = hourly("x", SensorKind.TEMPERATURE_F, range(3))
        with pytest.raises(InvalidWindow):
            window(s, T0 + timedelta(hours=2), T0)

    def test_empty_result_is_allowed(self):
        s = hourly("x", SensorKind.TEMPERATURE_F, range(3))
        w = window(s, T0 + timedelta(days=1), T0 + timedelta(days=2))
        assert len(w) == 0
        assert mean_value(w) is None

    def test_span(self, telemetry):
        assert telemetry_span(telemetry) == (T0, T0 + timedelta(hours=23))
        assert telemetry_span({}) is None


class TestEnergy:
    def test_constant_power_over_a_day(self):
        s = hourly("p", SensorKind.POWER_KW, [100.0] * 25)
        assert energy_kwh(s) == pytest.approx(2400.0)

    def test_trapezoid_on_a_ramp(self):
        s = hourly("p", SensorKind.POWER_KW, [0.0, 10.0, 20.0])
        assert energy_kwh(s) == pytest.approx(20.0)

    def test_watts_are_scaled(self):
        s = hourly("p", SensorKind.POWER_W, [500.0, 500.0])
        assert list(power_kw(s)) == [0.5, 0.5]
        assert energy_kwh(s) == pytest.approx(0.5)

    def test_single_point_has_no_energy(self):
        assert energy_kwh(hourly("p", SensorKind.POWER_KW, [10.0])) is None

    def test_non_power_series_rejected(self):
        with pytest.raises(ValidationError):
            power_kw(hourly("t", SensorKind.TEMPERATURE_F, [70.0]))


def test_resolve_sensors_lists_missing_in_order(telemetry):
    assert resolve_sensors(["amb-1", "ghost-2", "ghost-1", "ghost-2"], telemetry) == [
        "ghost-2", "ghost-1",
    ]


def test_format_timestamp_uses_z_suffix():
    assert format_timestamp(T0) == "2024-01-01T00:00:00Z"
