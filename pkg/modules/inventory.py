"""
Inventory: the static asset tree of a data center.

Rooms hold aisles, filters, lamps, HVAC units and fans; aisles hold racks;
racks hold servers. Loaded from a single JSON document and validated before any
metric is computed. Models are frozen, so a loaded Inventory can be shared
freely between threads.
"""

import json
import logging
from collections import Counter
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from modules.errors import IoError, ParseError, ValidationError

logger = logging.getLogger(__name__)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ── Enums ────────────────────────────────────────────────────
class ThermalRole(str, Enum):
    HOT = "hot"
    COLD = "cold"
    UNASSIGNED = "unassigned"


class Cabling(str, Enum):
    STRUCTURED = "structured"
    UNSTRUCTURED = "unstructured"
    UNKNOWN = "unknown"


class FilterPurpose(str, Enum):
    EXTERNAL_INTAKE = "external_intake"
    INTERNAL_RECIRCULATION = "internal_recirculation"


class Bulb(str, Enum):
    LED = "led"
    INCANDESCENT = "incandescent"
    FLUORESCENT = "fluorescent"
    OTHER = "other"


class PowerKind(str, Enum):
    RENEWABLE = "renewable"
    NON_RENEWABLE = "non_renewable"


# ── Assets ───────────────────────────────────────────────────
class Server(_Frozen):
    id: str = Field(min_length=1)
    in_use: bool = True
    rated_gflops: float = Field(default=0.0, ge=0)
    measured_power_w: float = Field(default=0.0, ge=0)
    cpu_utilization_sensor_id: Optional[str] = None


class Rack(_Frozen):
    id: str = Field(min_length=1)
    aisle_id: Optional[str] = None
    cabling: Cabling = Cabling.UNKNOWN
    intake_sensor_ids: list[str] = []
    exhaust_sensor_ids: list[str] = []
    airflow_sensor_id: Optional[str] = None
    servers: list[Server] = []


class Aisle(_Frozen):
    id: str = Field(min_length=1)
    room_id: Optional[str] = None
    thermal_role: ThermalRole = ThermalRole.UNASSIGNED
    barrier_installed: bool = False
    racks: list[Rack] = []
    neighbor_ids: list[str] = []


class AirFilter(_Frozen):
    id: str = Field(min_length=1)
    merv_rating: int
    purpose: FilterPurpose


class Lamp(_Frozen):
    id: str = Field(min_length=1)
    bulb: Bulb
    dimmable: bool = False
    occupancy_sensor: bool = False
    rated_power_w: float = Field(default=0.0, ge=0)


class HvacUnit(_Frozen):
    id: str = Field(min_length=1)
    power_sensor_id: str
    load_sensor_id: str


class Fan(_Frozen):
    id: str = Field(min_length=1)
    power_sensor_id: str
    airflow_sensor_id: str


class PowerSource(_Frozen):
    id: str = Field(min_length=1)
    kind: PowerKind
    energy_supplied_kwh: float = Field(ge=0)


class Room(_Frozen):
    id: str = Field(min_length=1)
    aisles: list[Aisle] = []
    filters: list[AirFilter] = []
    lamps: list[Lamp] = []
    hvac_units: list[HvacUnit] = []
    fans: list[Fan] = []
    ambient_sensor_ids: list[str] = []
    supply_sensor_ids: list[str] = []
    return_sensor_ids: list[str] = []


class FacilityMeters(_Frozen):
    """Data-center level meters feeding the global metrics."""

    facility_power: list[str] = []
    it_power: list[str] = []
    cooling_power: list[str] = []
    power_distribution_power: list[str] = []
    lighting_power: list[str] = []
    reuse_power: list[str] = []
    it_energy_annual: list[str] = []
    hvac_energy_annual: list[str] = []

    def all_sensor_ids(self) -> list[str]:
        ids = []
        for name in type(self).model_fields:
            ids.extend(getattr(self, name))
        return ids


class Inventory(_Frozen):
    data_center_id: str = Field(min_length=1)
    rooms: list[Room] = []
    power_sources: list[PowerSource] = []
    meters: FacilityMeters = FacilityMeters()
    metadata: dict[str, str] = {}
    captured_at: datetime

    @field_validator("captured_at")
    @classmethod
    def _utc(cls, value: datetime) -> datetime:
        if value.tzinfo is None:
            return value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)

    # ── Convenience walkers ──────────────────────────────────
    def aisles(self) -> list[Aisle]:
        return [a for room in self.rooms for a in room.aisles]

    def racks(self) -> list[Rack]:
        return [r for a in self.aisles() for r in a.racks]

    def servers(self) -> list[Server]:
        return [s for r in self.racks() for s in r.servers]

    def filters(self) -> list[AirFilter]:
        return [f for room in self.rooms for f in room.filters]

    def lamps(self) -> list[Lamp]:
        return [lamp for room in self.rooms for lamp in room.lamps]

    def fans(self) -> list[Fan]:
        return [f for room in self.rooms for f in room.fans]

    def hvac_units(self) -> list[HvacUnit]:
        return [h for room in self.rooms for h in room.hvac_units]

    def sensor_ids(self) -> list[str]:
        """Every sensor id referenced anywhere in the inventory, in document order."""
        ids: list[str] = []
        for room in self.rooms:
            ids += room.ambient_sensor_ids + room.supply_sensor_ids + room.return_sensor_ids
            for aisle in room.aisles:
                for rack in aisle.racks:
                    ids += rack.intake_sensor_ids + rack.exhaust_sensor_ids
                    if rack.airflow_sensor_id:
                        ids.append(rack.airflow_sensor_id)
                    ids += [s.cpu_utilization_sensor_id for s in rack.servers
                            if s.cpu_utilization_sensor_id]
            for hvac in room.hvac_units:
                ids += [hvac.power_sensor_id, hvac.load_sensor_id]
            for fan in room.fans:
                ids += [fan.power_sensor_id, fan.airflow_sensor_id]
        ids += self.meters.all_sensor_ids()
        return list(dict.fromkeys(ids))


# ── Validation ───────────────────────────────────────────────
def _iter_ids(inventory: Inventory) -> Iterator[tuple[str, str]]:
    for room in inventory.rooms:
        yield "room", room.id
        for aisle in room.aisles:
            yield "aisle", aisle.id
            for rack in aisle.racks:
                yield "rack", rack.id
                for server in rack.servers:
                    yield "server", server.id
        for f in room.filters:
            yield "filter", f.id
        for lamp in room.lamps:
            yield "lamp", lamp.id
        for hvac in room.hvac_units:
            yield "hvac unit", hvac.id
        for fan in room.fans:
            yield "fan", fan.id
    for source in inventory.power_sources:
        yield "power source", source.id


def validate_inventory(inventory: Inventory) -> Inventory:
    """
    Check the cross-object invariants pydantic cannot express field by field.

    Raises ValidationError naming the offending id.
    """
    counts = Counter(asset_id for _, asset_id in _iter_ids(inventory))
    duplicates = sorted(asset_id for asset_id, n in counts.items() if n > 1)
    if duplicates:
        raise ValidationError(f"duplicate id(s): {', '.join(duplicates)}")

    room_ids = {room.id for room in inventory.rooms}
    aisle_ids = {a.id for a in inventory.aisles()}

    for room in inventory.rooms:
        for f in room.filters:
            if not 1 <= f.merv_rating <= 20:
                raise ValidationError(
                    f"filter '{f.id}': merv_rating {f.merv_rating} outside [1, 20]"
                )
        for aisle in room.aisles:
            if aisle.room_id is not None:
                if aisle.room_id not in room_ids:
                    raise ValidationError(
                        f"aisle '{aisle.id}': dangling room reference '{aisle.room_id}'"
                    )
                if aisle.room_id != room.id:
                    raise ValidationError(
                        f"aisle '{aisle.id}': mismatched room reference "
                        f"'{aisle.room_id}' (contained in '{room.id}')"
                    )
            if aisle.id in aisle.neighbor_ids:
                raise ValidationError(f"aisle '{aisle.id}' lists itself as a neighbor")
            for neighbor in aisle.neighbor_ids:
                if neighbor not in aisle_ids:
                    raise ValidationError(
                        f"aisle '{aisle.id}': dangling neighbor reference '{neighbor}'"
                    )
            for rack in aisle.racks:
                if rack.aisle_id is not None:
                    if rack.aisle_id not in aisle_ids:
                        raise ValidationError(
                            f"rack '{rack.id}': dangling aisle reference '{rack.aisle_id}'"
                        )
                    if rack.aisle_id != aisle.id:
                        raise ValidationError(
                            f"rack '{rack.id}': mismatched aisle reference "
                            f"'{rack.aisle_id}' (contained in '{aisle.id}')"
                        )
                for server in rack.servers:
                    if server.rated_gflops > 0 and server.measured_power_w <= 0:
                        raise ValidationError(
                            f"server '{server.id}': rated_gflops > 0 requires measured_power_w > 0"
                        )
    return inventory


# ── Load / Save ──────────────────────────────────────────────
def parse_inventory(text: str, source: str = "<inventory>") -> Inventory:
    """Parse and validate inventory JSON text."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=source, line=e.lineno) from e

    try:
        inventory = Inventory.model_validate(payload)
    except pydantic.ValidationError as e:
        err = e.errors()[0]
        field = ".".join(str(p) for p in err["loc"])
        raise ParseError(err["msg"], path=source, field=field) from e

    return validate_inventory(inventory)


def load_inventory(path) -> Inventory:
    """Load and validate an inventory JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read inventory: {e}", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"inventory is not valid UTF-8: {e.reason}",
                         path=str(path)) from e

    inventory = parse_inventory(text, source=str(path))
    logger.info(
        f"Loaded inventory '{inventory.data_center_id}': {len(inventory.rooms)} rooms, "
        f"{len(inventory.aisles())} aisles, {len(inventory.racks())} racks, "
        f"{len(inventory.servers())} servers"
    )
    return inventory


def serialize_inventory(inventory: Inventory) -> str:
    """Inverse of parse_inventory."""
    return inventory.model_dump_json(indent=2) + "\n"


def write_inventory(inventory: Inventory, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_inventory(inventory), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write inventory to {path}: {e}") from e
    return path
