"""
Fixture Simulator: seeded synthetic inventories and telemetry.

Compliance levels are controllable per audit item, and the facility power
series is built as target_pue x IT power at every timestamp, so an audit of
the output reproduces the requested PUE. Randomness comes from numpy's PCG64
(`numpy.random.default_rng(seed)`); the generator is named in the inventory
metadata.
"""

import logging
import math
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import FIXTURE_INVENTORY_FILE, FIXTURE_PRNG, FIXTURE_TELEMETRY_FILE
from modules.errors import InfeasibleProfile
from modules.inventory import (
    AirFilter, Aisle, Bulb, Cabling, FacilityMeters, Fan, FilterPurpose, HvacUnit, Inventory,
    Lamp, PowerKind, PowerSource, Rack, Room, Server, ThermalRole, validate_inventory,
    write_inventory,
)
from modules.telemetry import SensorKind, TelemetrySeries, write_telemetry

logger = logging.getLogger(__name__)

RATE_KEYS = (
    "ALT_AISLES", "BARRIERS", "CABLING", "MERV", "LED", "DIMMING", "OCCUPANCY",
    "UNUSED_SERVERS", "POWER_SOURCES",
)
# unused fraction defaults to 0, every other rate to full compliance
DEFAULT_RATES = {key: 1.0 for key in RATE_KEYS} | {"UNUSED_SERVERS": 0.0}

TOTAL_SOURCE_KWH = 1_000_000


class AisleLayout(str, Enum):
    ROW = "row"
    RING = "ring"


class FixtureProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 1
    rooms: int = Field(default=1, gt=0)
    aisles: int = Field(default=4, gt=0)
    racks: int = Field(default=8, gt=0)
    servers_per_rack: int = Field(default=4, gt=0)
    lamps: int = Field(default=10, gt=0)
    filters: int = Field(default=4, gt=0)
    fans: int = Field(default=2, gt=0)
    hvac_units: int = Field(default=2, gt=0)
    power_sources: int = Field(default=2, gt=0)
    target_pue: float = Field(default=1.4, ge=1.0)
    ambient_mean_f: float = 72.0
    ambient_jitter_f: float = Field(default=4.0, ge=0)
    compliance_rates: dict[str, float] = {}
    start: datetime = datetime(2024, 1, 1, tzinfo=timezone.utc)
    step_minutes: int = Field(default=60, gt=0)
    points: int = Field(default=24, ge=2)
    aisle_layout: AisleLayout = AisleLayout.ROW

    @field_validator("compliance_rates")
    @classmethod
    def _rates(cls, rates: dict[str, float]) -> dict[str, float]:
        for key, value in rates.items():
            if key not in RATE_KEYS:
                raise ValueError(f"unknown compliance rate '{key}' (known: {', '.join(RATE_KEYS)})")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"compliance rate {key}={value} outside [0, 1]")
        return rates

    @field_validator("start")
    @classmethod
    def _utc(cls, value: datetime) -> datetime:
        if value.tzinfo is None:
            return value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)

    @model_validator(mode="after")
    def _finite_mean(self):
        if not math.isfinite(self.ambient_mean_f):
            raise ValueError("ambient_mean_f must be finite")
        return self

    def rate(self, key: str) -> float:
        return self.compliance_rates.get(key, DEFAULT_RATES[key])

    def timestamps(self) -> list[datetime]:
        step = timedelta(minutes=self.step_minutes)
        return [self.start + i * step for i in range(self.points)]


def requested_count(rate: float, total: int) -> int:
    """floor(rate x total), guarded against 0.29 * 100 = 28.999..."""
    return min(total, math.floor(rate * total + 1e-9))


# ── Aisle alternation ────────────────────────────────────────
def _is_ring(n: int, layout: AisleLayout) -> bool:
    return layout is AisleLayout.RING and n >= 3


def neighbor_ids(ids: list[str], layout: AisleLayout) -> list[list[str]]:
    n = len(ids)
    if _is_ring(n, layout):
        return [[ids[(i - 1) % n], ids[(i + 1) % n]] for i in range(n)]
    return [[ids[j] for j in (i - 1, i + 1) if 0 <= j < n] for i in range(n)]


def _feasible(n: int, bad: int, ring: bool) -> bool:
    """Can exactly `bad` of n aisles be non-compliant?"""
    if not 0 <= bad <= n:
        return False
    if n == 1:
        return True
    if bad == 1:
        # a non-compliant aisle always drags a neighbor down with it
        return False
    if ring:
        if bad == 0:
            return n % 2 == 0
        if bad == 2:
            return (n - bad) % 2 == 1
    return True


def _alternate(length: int, first: ThermalRole) -> list[ThermalRole]:
    other = ThermalRole.HOT if first is ThermalRole.COLD else ThermalRole.COLD
    return [first if i % 2 == 0 else other for i in range(length)]


def aisle_roles(n: int, compliant: int, layout: AisleLayout) -> list[ThermalRole]:
    """
    Roles for n aisles with exactly `compliant` alternating ones.

    The non-compliant aisles form one block at the start; the compliant ones
    alternate after it. Raises InfeasibleProfile if the count cannot exist.
    """
    ring = _is_ring(n, layout)
    bad = n - compliant
    if not _feasible(n, bad, ring):
        raise InfeasibleProfile(
            f"{n} aisles in a {'ring' if ring else 'row'} cannot have exactly "
            f"{compliant} alternating aisle(s)"
        )
    H, C, U = ThermalRole.HOT, ThermalRole.COLD, ThermalRole.UNASSIGNED
    if bad == 0:
        return _alternate(n, C)
    if n == 1:
        return [U]
    if compliant == 0:
        return [H] * n
    if not ring or compliant % 2 == 1:
        return [H] * bad + _alternate(compliant, C)
    # ring with an even compliant run: it must start Hot and end Cold
    if bad == 3:
        return [H, U, C] + _alternate(compliant, H)
    return [H] * (bad - 2) + [C, C] + _alternate(compliant, H)


def realize_alternation(n: int, rate: float, layout: AisleLayout) -> list[ThermalRole]:
    """Nearest realizable compliant count within one aisle of rate x n."""
    ring = _is_ring(n, layout)
    target = requested_count(rate, n)
    candidates = [target, target + 1]
    if math.isclose(rate * n, target):
        candidates.append(target - 1)
    for compliant in candidates:
        if 0 <= compliant <= n and _feasible(n, n - compliant, ring):
            if compliant != target:
                logger.warning(f"ALT_AISLES: {target}/{n} alternating aisles is not realizable "
                               f"in a {layout.value}; using {compliant}/{n}")
            return aisle_roles(n, compliant, layout)
    raise InfeasibleProfile(
        f"ALT_AISLES rate {rate} cannot be realized by {n} aisles in a "
        f"{'ring' if ring else 'row'}"
        + (" (an odd ring cannot alternate everywhere)" if ring and n % 2 else "")
    )


# ── Generation ───────────────────────────────────────────────
def _split(count: int, parts: int) -> list[list[int]]:
    """Indices 0..count-1 dealt round-robin into `parts` buckets."""
    return [list(range(i, count, parts)) for i in range(parts)]


def _series(sensor_id: str, kind: SensorKind, stamps, values) -> TelemetrySeries:
    return TelemetrySeries(sensor_id=sensor_id, kind=kind,
                           points=tuple(zip(stamps, (float(v) for v in values))))


def _jitter(rng: np.random.Generator, center: float, spread: float, size: int) -> np.ndarray:
    return np.round(center + rng.uniform(-spread, spread, size), 3)


def generate(profile: FixtureProfile) -> tuple[Inventory, dict[str, TelemetrySeries]]:
    """Inventory and telemetry for a profile; identical for identical profiles."""
    rng = np.random.default_rng(profile.seed)
    stamps = profile.timestamps()
    npts = len(stamps)
    series: dict[str, TelemetrySeries] = {}

    def add(sensor_id: str, kind: SensorKind, values) -> str:
        series[sensor_id] = _series(sensor_id, kind, stamps, values)
        return sensor_id

    # Aisles
    aisle_ids = [f"aisle-{i + 1:02d}" for i in range(profile.aisles)]
    roles = realize_alternation(profile.aisles, profile.rate("ALT_AISLES"), profile.aisle_layout)
    neighbors = neighbor_ids(aisle_ids, profile.aisle_layout)
    barriers = requested_count(profile.rate("BARRIERS"), profile.aisles)

    # Racks and servers
    structured = requested_count(profile.rate("CABLING"), profile.racks)
    n_servers = profile.racks * profile.servers_per_rack
    unused = requested_count(profile.rate("UNUSED_SERVERS"), n_servers)
    rack_aisle = [r % profile.aisles for r in range(profile.racks)]
    racks_by_aisle: list[list[Rack]] = [[] for _ in range(profile.aisles)]
    it_watts = 0.0
    server_index = 0
    for r in range(profile.racks):
        rack_id = f"rack-{r + 1:03d}"
        servers = []
        for _ in range(profile.servers_per_rack):
            server_id = f"srv-{server_index + 1:04d}"
            in_use = server_index >= unused
            power = float(np.round(rng.uniform(300.0, 500.0), 1))
            gflops = float(np.round(power * rng.uniform(18.0, 30.0), 1))
            util = rng.uniform(55.0, 80.0, npts) if in_use else rng.uniform(0.0, 5.0, npts)
            servers.append(Server(
                id=server_id, in_use=in_use, rated_gflops=gflops, measured_power_w=power,
                cpu_utilization_sensor_id=add(f"cpu-{server_id}", SensorKind.CPU_UTILIZATION_PCT,
                                              np.round(util, 3)),
            ))
            it_watts += power
            server_index += 1

        intake = _jitter(rng, 68.0, 1.5, npts)
        exhaust = np.round(intake + 20.0 + rng.uniform(-1.0, 1.0, npts), 3)
        racks_by_aisle[rack_aisle[r]].append(Rack(
            id=rack_id, aisle_id=aisle_ids[rack_aisle[r]],
            cabling=Cabling.STRUCTURED if r < structured else Cabling.UNSTRUCTURED,
            intake_sensor_ids=[add(f"in-{rack_id}", SensorKind.TEMPERATURE_F, intake)],
            exhaust_sensor_ids=[add(f"ex-{rack_id}", SensorKind.TEMPERATURE_F, exhaust)],
            airflow_sensor_id=add(f"af-{rack_id}", SensorKind.AIRFLOW_CFM,
                                  _jitter(rng, 1200.0, 60.0, npts)),
            servers=servers,
        ))

    # Facility meters: facility = target_pue x IT at every timestamp
    it_kw = np.round(it_watts / 1000.0 * (1.0 + rng.uniform(-0.02, 0.02, npts)), 3)
    facility_kw = profile.target_pue * it_kw
    overhead_kw = facility_kw - it_kw
    cooling_kw = overhead_kw * 0.7
    meters = FacilityMeters(
        facility_power=[add("facility-power", SensorKind.POWER_KW, facility_kw)],
        it_power=[add("it-power", SensorKind.POWER_KW, it_kw)],
        cooling_power=[add("cooling-power", SensorKind.POWER_KW, cooling_kw)],
        power_distribution_power=[add("distribution-power", SensorKind.POWER_KW,
                                      overhead_kw * 0.2)],
        lighting_power=[add("lighting-power", SensorKind.POWER_KW, overhead_kw * 0.1)],
        it_energy_annual=[add("it-annual", SensorKind.ENERGY_KWH_ANNUAL,
                              np.full(npts, round(float(it_kw.mean()) * 8760.0, 3)))],
        hvac_energy_annual=[add("hvac-annual", SensorKind.ENERGY_KWH_ANNUAL,
                                np.full(npts, round(float(cooling_kw.mean()) * 8760.0, 3)))],
    )

    # Room-level assets
    filters_by_room = _split(profile.filters, profile.rooms)
    lamps_by_room = _split(profile.lamps, profile.rooms)
    fans_by_room = _split(profile.fans, profile.rooms)
    hvac_by_room = _split(profile.hvac_units, profile.rooms)
    aisles_by_room = _split(profile.aisles, profile.rooms)
    merv_ok = requested_count(profile.rate("MERV"), profile.filters)
    led = requested_count(profile.rate("LED"), profile.lamps)
    dimming = requested_count(profile.rate("DIMMING"), profile.lamps)
    occupancy = requested_count(profile.rate("OCCUPANCY"), profile.lamps)

    rooms = []
    for room_index in range(profile.rooms):
        room_id = f"room-{room_index + 1}"

        filters = []
        for i in filters_by_room[room_index]:
            external = i % 2 == 0
            if external:
                merv = 12 if i < merv_ok else 9
            else:
                merv = 8 if i < merv_ok else 6
            filters.append(AirFilter(
                id=f"filter-{i + 1:02d}", merv_rating=merv,
                purpose=FilterPurpose.EXTERNAL_INTAKE if external
                else FilterPurpose.INTERNAL_RECIRCULATION,
            ))

        lamps = [
            Lamp(id=f"lamp-{i + 1:03d}", bulb=Bulb.LED if i < led else Bulb.INCANDESCENT,
                 dimmable=i < dimming, occupancy_sensor=i < occupancy,
                 rated_power_w=9.0 if i < led else 60.0)
            for i in lamps_by_room[room_index]
        ]

        fans = []
        for i in fans_by_room[room_index]:
            fan_id = f"fan-{i + 1:02d}"
            fans.append(Fan(
                id=fan_id,
                power_sensor_id=add(f"{fan_id}-power", SensorKind.POWER_W,
                                    _jitter(rng, 400.0, 20.0, npts)),
                airflow_sensor_id=add(f"{fan_id}-airflow", SensorKind.AIRFLOW_CFM,
                                      _jitter(rng, 800.0, 40.0, npts)),
            ))

        hvac_units = []
        for i in hvac_by_room[room_index]:
            unit_id = f"hvac-{i + 1:02d}"
            unit_kw = cooling_kw / profile.hvac_units
            kw_per_ton = rng.uniform(0.65, 0.95)
            hvac_units.append(HvacUnit(
                id=unit_id,
                power_sensor_id=add(f"{unit_id}-power", SensorKind.POWER_KW, unit_kw),
                load_sensor_id=add(f"{unit_id}-load", SensorKind.COOLING_LOAD_TONS,
                                   np.round(unit_kw / kw_per_ton, 3)),
            ))

        supply = _jitter(rng, 60.0, 0.5, npts)
        ambient = _jitter(rng, profile.ambient_mean_f, profile.ambient_jitter_f, npts)
        aisles = [
            Aisle(id=aisle_ids[a], room_id=room_id, thermal_role=roles[a],
                  barrier_installed=a < barriers, racks=racks_by_aisle[a],
                  neighbor_ids=neighbors[a])
            for a in aisles_by_room[room_index]
        ]
        rooms.append(Room(
            id=room_id, aisles=aisles, filters=filters, lamps=lamps, hvac_units=hvac_units,
            fans=fans,
            ambient_sensor_ids=[add(f"ambient-{room_id}", SensorKind.TEMPERATURE_F, ambient)],
            supply_sensor_ids=[add(f"supply-{room_id}", SensorKind.TEMPERATURE_F, supply)],
            return_sensor_ids=[add(f"return-{room_id}", SensorKind.TEMPERATURE_F,
                                   np.round(supply + 20.0 + rng.uniform(-0.5, 0.5, npts), 3))],
        ))

    inventory = Inventory(
        data_center_id=f"fixture-{profile.seed}",
        rooms=rooms,
        power_sources=_power_sources(profile),
        meters=meters,
        metadata={
            "generator": "fixture-simulator",
            "prng": FIXTURE_PRNG,
            "seed": str(profile.seed),
            "aisle_layout": profile.aisle_layout.value,
            "target_pue": repr(profile.target_pue),
        },
        captured_at=profile.start,
    )
    validate_inventory(inventory)
    logger.info(f"🧪 Generated fixture seed={profile.seed}: {profile.racks} racks, "
                f"{n_servers} servers, {len(series)} series x {npts} points")
    return inventory, dict(sorted(series.items()))


def _power_sources(profile: FixtureProfile) -> list[PowerSource]:
    """Sources whose renewable share of TOTAL_SOURCE_KWH equals the requested rate."""
    n = profile.power_sources
    rate = profile.rate("POWER_SOURCES")
    if rate == 1.0:
        renewable = n
    elif rate == 0.0:
        renewable = 0
    elif n == 1:
        raise InfeasibleProfile(
            f"renewable fraction {rate} needs at least two power sources, profile has one"
        )
    else:
        renewable = min(n - 1, max(1, requested_count(rate, n)))

    sources = []
    green = TOTAL_SOURCE_KWH * rate
    for i in range(n):
        is_green = i < renewable
        share = (green / renewable) if is_green else (TOTAL_SOURCE_KWH - green) / (n - renewable)
        sources.append(PowerSource(
            id=f"source-{i + 1}", kind=PowerKind.RENEWABLE if is_green else PowerKind.NON_RENEWABLE,
            energy_supplied_kwh=share,
        ))
    return sources


def write_fixture(inventory: Inventory, telemetry, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    inv_path = write_inventory(inventory, out_dir / FIXTURE_INVENTORY_FILE)
    tel_path = write_telemetry(telemetry, out_dir / FIXTURE_TELEMETRY_FILE)
    logger.info(f"💾 Fixture written to {out_dir}")
    return inv_path, tel_path


# ── Test ─────────────────────────────────────────────────────
if __name__ == "__main__":
    inv, tel = generate(FixtureProfile(seed=1, compliance_rates={"LED": 0.5}))
    print(f"{inv.data_center_id}: {len(inv.lamps())} lamps, "
          f"{sum(lamp.bulb is Bulb.LED for lamp in inv.lamps())} LED, {len(tel)} series")
