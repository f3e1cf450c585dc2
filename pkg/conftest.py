"""Shared pytest fixtures: hand-built inventories, telemetry builders, seeded fixtures."""

from datetime import datetime, timedelta, timezone

import pytest

from modules.fixture_simulator import FixtureProfile, generate
from modules.inventory import Inventory
from modules.telemetry import SensorKind, TelemetrySeries

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)


def hourly(sensor_id: str, kind: SensorKind, values, start: datetime = T0,
           step_minutes: int = 60) -> TelemetrySeries:
    step = timedelta(minutes=step_minutes)
    return TelemetrySeries(
        sensor_id=sensor_id, kind=kind,
        points=tuple((start + i * step, float(v)) for i, v in enumerate(values)),
    )


@pytest.fixture
def series():
    """Builder for an evenly spaced TelemetrySeries."""
    return hourly


@pytest.fixture
def inventory_doc() -> dict:
    """A small but complete inventory document (JSON-ready dict)."""
    return {
        "data_center_id": "dc-test",
        "captured_at": "2024-01-01T00:00:00Z",
        "rooms": [{
            "id": "room-1",
            "ambient_sensor_ids": ["amb-1"],
            "supply_sensor_ids": ["sup-1"],
            "return_sensor_ids": ["ret-1"],
            "aisles": [
                {"id": "a1", "room_id": "room-1", "thermal_role": "cold",
                 "barrier_installed": True, "neighbor_ids": ["a2"],
                 "racks": [{
                     "id": "r1", "aisle_id": "a1", "cabling": "structured",
                     "intake_sensor_ids": ["in-r1"], "exhaust_sensor_ids": ["ex-r1"],
                     "servers": [
                         {"id": "s1", "rated_gflops": 8000, "measured_power_w": 400,
                          "cpu_utilization_sensor_id": "cpu-s1"},
                         {"id": "s2", "rated_gflops": 4000, "measured_power_w": 400,
                          "cpu_utilization_sensor_id": "cpu-s2"},
                     ],
                 }]},
                {"id": "a2", "room_id": "room-1", "thermal_role": "hot",
                 "barrier_installed": False, "neighbor_ids": ["a1"],
                 "racks": [{
                     "id": "r2", "aisle_id": "a2", "cabling": "unstructured",
                     "intake_sensor_ids": ["in-r2"], "exhaust_sensor_ids": ["ex-r2"],
                     "servers": [{"id": "s3", "in_use": False}],
                 }]},
            ],
            "filters": [
                {"id": "f1", "merv_rating": 12, "purpose": "external_intake"},
                {"id": "f2", "merv_rating": 6, "purpose": "internal_recirculation"},
            ],
            "lamps": [
                {"id": "l1", "bulb": "led", "dimmable": True, "occupancy_sensor": True,
                 "rated_power_w": 9},
                {"id": "l2", "bulb": "incandescent", "rated_power_w": 60},
            ],
            "hvac_units": [{"id": "h1", "power_sensor_id": "h1-kw", "load_sensor_id": "h1-tons"}],
            "fans": [{"id": "fan1", "power_sensor_id": "fan1-w", "airflow_sensor_id": "fan1-cfm"}],
        }],
        "power_sources": [
            {"id": "solar", "kind": "renewable", "energy_supplied_kwh": 250},
            {"id": "grid", "kind": "non_renewable", "energy_supplied_kwh": 750},
        ],
        "meters": {"facility_power": ["fac-kw"], "it_power": ["it-kw"]},
    }


@pytest.fixture
def inventory(inventory_doc) -> Inventory:
    from modules.inventory import validate_inventory
    return validate_inventory(Inventory.model_validate(inventory_doc))


@pytest.fixture
def telemetry() -> dict[str, TelemetrySeries]:
    """24 hourly readings for every sensor of `inventory`."""
    n = 24
    data = [
        hourly("amb-1", SensorKind.TEMPERATURE_F, [72.0] * 23 + [85.0]),
        hourly("sup-1", SensorKind.TEMPERATURE_F, [60.0] * n),
        hourly("ret-1", SensorKind.TEMPERATURE_F, [80.0] * n),
        hourly("in-r1", SensorKind.TEMPERATURE_F, [70.0] * n),
        hourly("ex-r1", SensorKind.TEMPERATURE_F, [90.0] * n),
        hourly("in-r2", SensorKind.TEMPERATURE_F, [70.0] * n),
        hourly("ex-r2", SensorKind.TEMPERATURE_F, [90.0] * n),
        hourly("cpu-s1", SensorKind.CPU_UTILIZATION_PCT, [60.0] * n),
        hourly("cpu-s2", SensorKind.CPU_UTILIZATION_PCT, [70.0] * n),
        hourly("h1-kw", SensorKind.POWER_KW, [80.0] * n),
        hourly("h1-tons", SensorKind.COOLING_LOAD_TONS, [100.0] * n),
        hourly("fan1-w", SensorKind.POWER_W, [500.0] * n),
        hourly("fan1-cfm", SensorKind.AIRFLOW_CFM, [1000.0] * n),
        hourly("fac-kw", SensorKind.POWER_KW, [140.0] * n),
        hourly("it-kw", SensorKind.POWER_KW, [100.0] * n),
    ]
    return {s.sensor_id: s for s in data}


@pytest.fixture(scope="session")
def fixture_data():
    """Default seeded synthetic data center (seed 1)."""
    return generate(FixtureProfile(seed=1))
