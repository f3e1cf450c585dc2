"""
Audit Engine: evaluates every registry item against an inventory and its telemetry.

Each item is evaluated independently from immutable inputs, so the items of a
report run on a thread pool and are joined back in registry order. Missing
inputs never abort an audit: the item comes back NotApplicable with a warning.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import (
    AUDIT_ASHRAE_CLASS, AUDIT_EQUIP_EFF_THRESHOLD, AUDIT_RTI_TOLERANCE_PCT,
    AUDIT_THRESHOLDS_FILE, AUDIT_UTILIZATION_AGGREGATION, AUDIT_WORKERS,
    HVACSE_MIN_WINDOW_DAYS, TOOL_VERSION,
)
from modules.audit_registry import (
    CATEGORY_ORDER, ITEMS_BY_ID, AuditItem, Category, Level, Tier, items_for_mode,
)
from modules.benchmarks import (
    DEFAULT_TABLES, AshraeClass, BenchmarkRating, BenchmarkTables, Rating,
    check_filter, envelope_for, filter_warnings, load_thresholds, rate,
)
from modules.errors import InvalidWindow, MetricError
from modules.inventory import Aisle, Bulb, Cabling, Inventory, PowerKind, ThermalRole
from modules.metrics import (
    CORRECT_UTILIZATION_MAX_PCT, UNDER_UTILIZATION_MAX_PCT, Aggregation, Band, MetricId,
    MetricValue, SavingsRange, ThermalEnvelope, UtilizationClass, airflow_efficiency,
    ambient_compliance_values, barrier_savings, classify_utilization, compliance_ratio,
    cooling_system_efficiency, dcie, equipment_delta_t, ere, gflop_per_watt, hvacse,
    led_savings, pue, rci, renewable_fraction, rti, rti_flag, setpoint_savings,
)
from modules.telemetry import (
    SensorKind, Telemetry, TelemetrySeries, energy_kwh, mean_value, power_kw, power_w,
    resolve_sensors, telemetry_span, window_all,
)

logger = logging.getLogger(__name__)

AuditMode = Tier

RATED_PASS = {Rating.BETTER, Rating.GOOD, Rating.STANDARD}


class Compliance(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    PARTIAL_NUMERIC = "PartialNumeric"
    NOT_APPLICABLE = "NotApplicable"


NEEDS_ACTION = {Compliance.FAIL, Compliance.PARTIAL_NUMERIC}


# ── Models ───────────────────────────────────────────────────
class AuditConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: AuditMode = AuditMode.FULL
    window: Optional[tuple[datetime, datetime]] = None
    ashrae_class: AshraeClass = AshraeClass(AUDIT_ASHRAE_CLASS)
    utilization_aggregation: Aggregation = Aggregation(AUDIT_UTILIZATION_AGGREGATION)
    equip_eff_threshold_gflop_per_w: float = Field(default=AUDIT_EQUIP_EFF_THRESHOLD, gt=0)
    thresholds_override_path: Optional[Path] = (
        Path(AUDIT_THRESHOLDS_FILE) if AUDIT_THRESHOLDS_FILE else None
    )
    rti_tolerance_pct: float = Field(default=AUDIT_RTI_TOLERANCE_PCT, ge=0)
    workers: int = Field(default=AUDIT_WORKERS, ge=1)


class AuditItemResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    title: str
    category: Category
    tier: Tier
    level: Level
    metrics: list[MetricValue] = []
    rating: Optional[BenchmarkRating] = None
    compliance: Compliance
    goal_statement: str
    actions: list[str] = []
    warnings: list[str] = []
    notes: list[str] = []
    flagged: list[str] = []
    savings: Optional[SavingsRange] = None

    @model_validator(mode="after")
    def _actions_when_needed(self):
        if self.compliance in NEEDS_ACTION and not self.actions:
            raise ValueError(f"{self.item_id}: {self.compliance.value} result without actions")
        if self.compliance is Compliance.NOT_APPLICABLE and not self.warnings:
            raise ValueError(f"{self.item_id}: NotApplicable result without a warning")
        return self

    def primary_metric(self) -> Optional[MetricValue]:
        return self.metrics[0] if self.metrics else None


class AuditReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    data_center_id: str
    mode: AuditMode
    window: tuple[datetime, datetime]
    ashrae_class: AshraeClass
    rti_tolerance_pct: float
    tables_version: str
    results: list[AuditItemResult]
    warnings: list[str] = []
    generated_at: datetime
    tool_version: str = TOOL_VERSION

    @model_validator(mode="after")
    def _tier_complete(self):
        expected = [item.item_id for item in items_for_mode(self.mode)]
        present = [r.item_id for r in self.results]
        if sorted(present) != sorted(expected):
            raise ValueError(
                f"{self.mode.value} report must hold items {expected}, got {present}"
            )
        return self

    def result(self, item_id: str) -> AuditItemResult:
        for r in self.results:
            if r.item_id == item_id:
                return r
        raise KeyError(item_id)

    def by_category(self) -> list[tuple[Category, list[AuditItemResult]]]:
        return [(cat, [r for r in self.results if r.category is cat]) for cat in CATEGORY_ORDER]


@dataclass
class AuditContext:
    """Everything an evaluator may read. Shared read-only across worker threads."""

    inventory: Inventory
    telemetry: dict[str, TelemetrySeries]
    config: AuditConfig
    tables: BenchmarkTables
    envelope: ThermalEnvelope
    window: tuple[datetime, datetime]

    @property
    def window_days(self) -> float:
        start, end = self.window
        return (end - start).total_seconds() / 86400.0

    def series(self, sensor_id: str, warnings: list[str],
               kinds: Optional[set[SensorKind]] = None) -> Optional[TelemetrySeries]:
        """Windowed series for a sensor, or None with a warning explaining why."""
        s = self.telemetry.get(sensor_id)
        if s is None:
            warnings.append(f"sensor '{sensor_id}' missing from telemetry")
            return None
        if kinds and s.kind not in kinds:
            warnings.append(f"sensor '{sensor_id}' is {s.kind.value}, expected "
                            f"{' or '.join(sorted(k.value for k in kinds))}")
            return None
        if not len(s):
            warnings.append(f"sensor '{sensor_id}' has no readings in the audit window")
            return None
        return s


POWER_KINDS = {SensorKind.POWER_W, SensorKind.POWER_KW}

OVER_TEMPERATURE_ACTION = (
    "Bring ambient temperatures back under the recommended maximum of {max_rec_f:g}°F "
    "by fixing hot spots and airflow before raising any setpoint."
)


# ── Result helpers ───────────────────────────────────────────
def _result(item: AuditItem, compliance: Compliance, metrics: list[MetricValue] = (),
            rating: Optional[BenchmarkRating] = None, warnings: list[str] = (),
            notes: list[str] = (), flagged: list[str] = (),
            savings: Optional[SavingsRange] = None,
            actions: Optional[list[str]] = None) -> AuditItemResult:
    if compliance not in NEEDS_ACTION:
        actions = []
    elif actions is None:
        actions = list(item.actions)
    return AuditItemResult(
        item_id=item.item_id, title=item.title, category=item.category, tier=item.tier,
        level=item.level, metrics=list(metrics), rating=rating, compliance=compliance,
        goal_statement=item.goal,
        actions=actions,
        warnings=list(warnings), notes=list(notes), flagged=list(flagged), savings=savings,
    )


def _not_applicable(item: AuditItem, warnings: list[str], reason: str) -> AuditItemResult:
    return _result(item, Compliance.NOT_APPLICABLE, warnings=[*warnings, reason])


def _pass_if(ok: bool) -> Compliance:
    return Compliance.PASS if ok else Compliance.FAIL


# ── Cooling air: alternation ─────────────────────────────────
_OPPOSITE = {ThermalRole.HOT: ThermalRole.COLD, ThermalRole.COLD: ThermalRole.HOT}


def eval_alternating_aisles(aisles: list[Aisle]) -> AuditItemResult:
    """
    An aisle complies when its role is assigned and every neighbor has the
    opposite role. Edge aisles only need their existing neighbors to alternate.
    """
    item = ITEMS_BY_ID["ALT_AISLES"]
    if not aisles:
        return _not_applicable(item, [], "no aisles in inventory")

    by_id = {a.id: a for a in aisles}
    warnings: list[str] = []
    flagged: list[str] = []
    for aisle in aisles:
        if aisle.thermal_role is ThermalRole.UNASSIGNED:
            flagged.append(aisle.id)
            continue
        neighbors = [by_id[n] for n in aisle.neighbor_ids if n in by_id]
        if not neighbors:
            warnings.append(f"aisle '{aisle.id}' has no neighbors; alternation holds vacuously")
            continue
        if any(n.thermal_role is not _OPPOSITE[aisle.thermal_role] for n in neighbors):
            flagged.append(aisle.id)

    metric = compliance_ratio(len(aisles) - len(flagged), len(aisles))
    return _result(item, _pass_if(not flagged), [metric], warnings=warnings, flagged=flagged)


# ── Simple fraction items ────────────────────────────────────
def _fraction_item(item: AuditItem, assets: list, predicate: Callable, kind: str,
                   warnings: list[str] = ()) -> tuple[Optional[AuditItemResult], list[str]]:
    """Ratio of assets satisfying predicate; returns (result, flagged ids)."""
    if not assets:
        return _not_applicable(item, list(warnings), f"no {kind} in inventory"), []
    flagged = [a.id for a in assets if not predicate(a)]
    metric = compliance_ratio(len(assets) - len(flagged), len(assets))
    return _result(item, _pass_if(not flagged), [metric], warnings=warnings,
                   flagged=flagged), flagged


def eval_simple_fraction_items(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    inv = ctx.inventory
    item_id = item.item_id

    if item_id == "BARRIERS":
        result, flagged = _fraction_item(item, inv.aisles(), lambda a: a.barrier_installed,
                                         "aisles")
        if flagged:
            result = result.model_copy(update={"savings": barrier_savings(len(flagged))})
        return result

    if item_id == "CABLING":
        racks = inv.racks()
        warnings = [f"rack '{r.id}': cabling state unknown, counted as non-compliant"
                    for r in racks if r.cabling is Cabling.UNKNOWN]
        return _fraction_item(item, racks, lambda r: r.cabling is Cabling.STRUCTURED,
                              "racks", warnings)[0]

    if item_id == "MERV":
        filters = inv.filters()
        warnings = [w for f in filters for w in filter_warnings(f)]
        return _fraction_item(item, filters, check_filter, "air filters", warnings)[0]

    if item_id == "LED":
        lamps = inv.lamps()
        result, flagged = _fraction_item(item, lamps, lambda lamp: lamp.bulb is Bulb.LED, "lamps")
        if flagged:
            # savings figure covers incandescent bulbs only
            watts = sum(Fraction(str(lamp.rated_power_w)) for lamp in lamps
                        if lamp.bulb is Bulb.INCANDESCENT)
            result = result.model_copy(update={"savings": led_savings(watts)})
        return result

    if item_id == "DIMMING":
        return _fraction_item(item, inv.lamps(), lambda lamp: lamp.dimmable, "lamps")[0]

    if item_id == "OCCUPANCY":
        return _fraction_item(item, inv.lamps(), lambda lamp: lamp.occupancy_sensor, "lamps")[0]

    if item_id == "UNUSED_SERVERS":
        servers = inv.servers()
        if not servers:
            return _not_applicable(item, [], "no servers in inventory")
        unused = [s.id for s in servers if not s.in_use]
        metric = MetricValue(
            metric_id=MetricId.UNUSED_FRACTION, value=len(unused) / len(servers),
            inputs_digest=f"{len(unused)}/{len(servers)} unused",
        )
        return _result(item, _pass_if(not unused), [metric], flagged=unused)

    if item_id == "POWER_SOURCES":
        sources = inv.power_sources
        if not sources:
            return _not_applicable(item, [], "no power sources in inventory")
        metric = renewable_fraction(sources)
        flagged = [s.id for s in sources if s.kind is PowerKind.NON_RENEWABLE]
        return _result(item, _pass_if(metric.value == 1.0), [metric], flagged=flagged)

    raise KeyError(f"{item_id} is not a simple-fraction item")


# ── Thermal items ────────────────────────────────────────────
def _readings(ctx: AuditContext, sensor_ids: list[str], warnings: list[str]) -> np.ndarray:
    chunks = []
    for sid in sensor_ids:
        s = ctx.series(sid, warnings, {SensorKind.TEMPERATURE_F})
        if s is not None:
            chunks.append(s.values())
    return np.concatenate(chunks) if chunks else np.array([], dtype=float)


def _mean_of(ctx: AuditContext, sensor_ids: list[str], warnings: list[str]) -> Optional[float]:
    values = _readings(ctx, sensor_ids, warnings)
    return float(values.mean()) if values.size else None


def _eval_rti(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    tolerance = ctx.config.rti_tolerance_pct
    warnings: list[str] = []
    notes = [f"RTI passes within 100 ± {tolerance:g} percentage points"]
    room_metrics: list[MetricValue] = []
    weights: list[Optional[float]] = []

    for room in ctx.inventory.rooms:
        if not room.supply_sensor_ids or not room.return_sensor_ids:
            warnings.append(f"room '{room.id}': no supply/return sensors, RTI skipped")
            continue
        supply = _mean_of(ctx, room.supply_sensor_ids, warnings)
        ret = _mean_of(ctx, room.return_sensor_ids, warnings)

        racks = []
        for aisle in room.aisles:
            for rack in aisle.racks:
                intake = _mean_of(ctx, rack.intake_sensor_ids, warnings)
                exhaust = _mean_of(ctx, rack.exhaust_sensor_ids, warnings)
                if intake is None or exhaust is None:
                    continue
                flow = None
                if rack.airflow_sensor_id:
                    s = ctx.series(rack.airflow_sensor_id, warnings, {SensorKind.AIRFLOW_CFM})
                    flow = mean_value(s) if s is not None else None
                racks.append((intake, exhaust, flow))

        if supply is None or ret is None:
            warnings.append(f"room '{room.id}': supply/return readings unavailable, RTI skipped")
            continue
        try:
            metric = rti(ret, supply, equipment_delta_t(racks), subject=f"room {room.id}")
        except MetricError as e:
            warnings.append(f"room '{room.id}': {e}")
            continue
        room_metrics.append(metric)
        flows = [flow for _, _, flow in racks]
        weights.append(sum(flows) if all(f is not None and f > 0 for f in flows) else None)

    if not room_metrics:
        return _not_applicable(item, warnings, "no room has the readings RTI needs")

    values = np.array([m.value for m in room_metrics])
    if all(w is not None for w in weights):
        overall = float(np.average(values, weights=np.array(weights, dtype=float)))
        how = "airflow-weighted"
    else:
        overall = float(values.mean())
        how = "unweighted"
    summary = MetricValue(
        metric_id=MetricId.RTI, value=overall, unit="%", label=rti_flag(overall),
        inputs_digest=f"{how} mean of {len(room_metrics)} room(s)",
    )

    flagged = [m.subject.removeprefix("room ") for m in room_metrics
               if abs(m.value - 100.0) > tolerance]
    for m in room_metrics:
        if m.subject.removeprefix("room ") in flagged:
            kind = "net bypass air" if m.label == "bypass" else "net recirculation air"
            notes.append(f"{m.subject}: RTI {m.value:.1f}% indicates {kind}")
    return _result(item, _pass_if(not flagged), [summary, *room_metrics],
                   warnings=warnings, notes=notes, flagged=flagged)


def _eval_rci(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    per_rack: list[MetricValue] = []
    flagged: list[str] = []
    audited = 0

    for rack in ctx.inventory.racks():
        if not rack.intake_sensor_ids:
            warnings.append(f"rack '{rack.id}' has no intake sensors; excluded from RCI")
            continue
        temps = _readings(ctx, rack.intake_sensor_ids, warnings)
        if not temps.size:
            warnings.append(f"rack '{rack.id}': no intake readings in window; excluded from RCI")
            continue
        hi, lo = rci(temps, ctx.envelope, subject=f"rack {rack.id}")
        per_rack += [hi, lo]
        audited += 1
        if hi.value < 100.0 or lo.value < 100.0:
            flagged.append(rack.id)

    if not audited:
        return _not_applicable(item, warnings, "no rack has intake temperature readings")

    summary = compliance_ratio(audited - len(flagged), audited)
    summary = summary.model_copy(update={"label": "racks at RCI_HI = RCI_LO = 100%"})
    return _result(item, _pass_if(not flagged), [summary, *per_rack],
                   warnings=warnings, flagged=flagged)


def _eval_ambient(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    sensor_ids = [sid for room in ctx.inventory.rooms for sid in room.ambient_sensor_ids]
    if not sensor_ids:
        return _not_applicable(item, [], "no ambient temperature sensors in inventory")

    values = _readings(ctx, sensor_ids, warnings)
    if not values.size:
        return _not_applicable(item, warnings, "no ambient temperature readings in window")

    env = ctx.envelope
    recommended = ambient_compliance_values(values, env, Band.RECOMMENDED)
    allowable = ambient_compliance_values(values, env, Band.ALLOWABLE)
    passed = recommended.value == 1.0

    flagged = []
    for sid in sensor_ids:
        s = ctx.telemetry.get(sid)
        if s is not None and len(s):
            v = s.values()
            if ((v < env.min_rec_f) | (v > env.max_rec_f)).any():
                flagged.append(sid)

    savings = None
    mean_f = float(values.mean())
    notes = [f"ASHRAE class {int(ctx.config.ashrae_class)}: recommended "
             f"{env.min_rec_f:g}-{env.max_rec_f:g}°F, allowable "
             f"{env.min_allow_f:g}-{env.max_allow_f:g}°F; mean ambient {mean_f:.1f}°F"]
    hottest = float(values.max())
    actions = None
    if hottest > env.max_rec_f:
        notes.append(f"hottest reading {hottest:.1f}°F exceeds the recommended maximum "
                     f"of {env.max_rec_f:g}°F; no setpoint increase advised")
        actions = [OVER_TEMPERATURE_ACTION.format(max_rec_f=env.max_rec_f)]
    else:
        headroom = round(env.max_rec_f - hottest, 1)
        if not passed and headroom > 0:
            savings = setpoint_savings(Fraction(str(headroom)))
    return _result(item, _pass_if(passed), [recommended, allowable], warnings=warnings,
                   notes=notes, flagged=flagged, savings=savings, actions=actions)


def eval_thermal_items(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    evaluators = {"RTI": _eval_rti, "RCI": _eval_rci, "AMBIENT_TEMP": _eval_ambient}
    return evaluators[item.item_id](item, ctx)


# ── Global items ─────────────────────────────────────────────
def _energy(ctx: AuditContext, sensor_ids: list[str], warnings: list[str],
            what: str) -> Optional[float]:
    """Summed window energy (kWh) of power meters; None if any meter is unusable."""
    if not sensor_ids:
        warnings.append(f"no {what} meter in inventory")
        return None
    total = 0.0
    for sid in sensor_ids:
        s = ctx.series(sid, warnings, POWER_KINDS)
        if s is None:
            return None
        kwh = energy_kwh(s)
        if kwh is None:
            warnings.append(f"sensor '{sid}' needs at least two readings to integrate energy")
            return None
        total += kwh
    return total


def _window_hours(ctx: AuditContext) -> float:
    start, end = ctx.window
    return (end - start).total_seconds() / 3600.0


def _pue_metric(ctx: AuditContext, warnings: list[str]) -> Optional[MetricValue]:
    facility = _energy(ctx, ctx.inventory.meters.facility_power, warnings, "facility power")
    it = _energy(ctx, ctx.inventory.meters.it_power, warnings, "IT power")
    if facility is None or it is None:
        return None
    if facility < it:
        warnings.append(f"facility energy {facility:.3f} kWh below IT energy {it:.3f} kWh")
    hours = _window_hours(ctx)
    if hours > 0:
        return pue(facility / hours, it / hours)
    return pue(facility, it)


def _rated(item: AuditItem, metric: MetricValue, ctx: AuditContext,
           warnings: list[str], notes: list[str] = ()) -> AuditItemResult:
    rating = rate(metric, ctx.tables)
    return _result(item, _pass_if(rating.rating in RATED_PASS), [metric], rating=rating,
                   warnings=warnings, notes=notes)


def _annual_kwh(ctx: AuditContext, annual_ids: list[str], power_ids: list[str],
                warnings: list[str], what: str) -> Optional[float]:
    """Annual energy from annual meters, else from a year-long power window."""
    if annual_ids:
        total = 0.0
        for sid in annual_ids:
            s = ctx.series(sid, warnings, {SensorKind.ENERGY_KWH_ANNUAL})
            if s is None:
                return None
            total += mean_value(s)
        return total
    if not power_ids:
        warnings.append(f"no {what} energy or power meters in inventory")
        return None
    if ctx.window_days < HVACSE_MIN_WINDOW_DAYS:
        warnings.append(f"{what}: window of {ctx.window_days:.1f} days is shorter than "
                        f"{HVACSE_MIN_WINDOW_DAYS} days and no annual energy readings exist")
        return None
    kwh = _energy(ctx, power_ids, warnings, what)
    return None if kwh is None else kwh * 365.0 / ctx.window_days


def _eval_pue(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    metric = _pue_metric(ctx, warnings)
    if metric is None:
        return _not_applicable(item, warnings, "PUE needs facility and IT power meters")
    return _rated(item, metric, ctx, warnings)


def _eval_dcie(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    p = _pue_metric(ctx, warnings)
    if p is None:
        return _not_applicable(item, warnings, "DCIE needs facility and IT power meters")
    return _rated(item, dcie(p.value), ctx, warnings)


def _eval_ere(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    meters = ctx.inventory.meters
    warnings: list[str] = []
    notes: list[str] = []
    it = _energy(ctx, meters.it_power, warnings, "IT power")
    if it is None:
        return _not_applicable(item, warnings, "ERE needs IT power meters")

    components = {
        "cooling": meters.cooling_power,
        "power distribution": meters.power_distribution_power,
        "lighting": meters.lighting_power,
    }
    energies: dict[str, float] = {}
    if not any(components.values()):
        facility = _energy(ctx, meters.facility_power, warnings, "facility power")
        if facility is None:
            return _not_applicable(item, warnings,
                                   "ERE needs component meters or a facility meter")
        energies["cooling"] = max(facility - it, 0.0)
        energies["power distribution"] = energies["lighting"] = 0.0
        notes.append("no cooling/power-distribution/lighting meters: "
                     "facility minus IT energy used as overhead")
    else:
        for name, ids in components.items():
            if not ids:
                notes.append(f"no {name} meter: {name} energy taken as 0")
                energies[name] = 0.0
                continue
            kwh = _energy(ctx, ids, warnings, f"{name} power")
            if kwh is None:
                return _not_applicable(item, warnings, f"ERE: {name} energy unavailable")
            energies[name] = kwh

    if meters.reuse_power:
        reuse = _energy(ctx, meters.reuse_power, warnings, "reuse power")
        if reuse is None:
            return _not_applicable(item, warnings, "ERE: reuse energy unavailable")
    else:
        reuse = 0.0
        notes.append("no reuse meter: reused energy taken as 0")

    metric = ere(energies["cooling"], energies["power distribution"], energies["lighting"],
                 it, reuse)
    return _result(item, Compliance.PARTIAL_NUMERIC, [metric], rating=rate(metric, ctx.tables),
                   warnings=warnings, notes=notes)


def _eval_hvacse(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    meters = ctx.inventory.meters
    warnings: list[str] = []
    hvac_power = meters.cooling_power or [h.power_sensor_id for h in ctx.inventory.hvac_units()]
    it_annual = _annual_kwh(ctx, meters.it_energy_annual, meters.it_power, warnings, "IT")
    hvac_annual = _annual_kwh(ctx, meters.hvac_energy_annual, hvac_power, warnings, "HVAC")
    if it_annual is None or hvac_annual is None:
        return _not_applicable(item, warnings, "HVACSE needs a year of IT and HVAC energy")
    return _rated(item, hvacse(it_annual, hvac_annual), ctx, warnings)


def _eval_ae(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    fans = ctx.inventory.fans()
    if not fans:
        return _not_applicable(item, [], "no fans in inventory")
    watts = cfm = 0.0
    used = 0
    for fan in fans:
        p = ctx.series(fan.power_sensor_id, warnings, POWER_KINDS)
        a = ctx.series(fan.airflow_sensor_id, warnings, {SensorKind.AIRFLOW_CFM})
        if p is None or a is None:
            continue
        watts += float(power_w(p).mean())
        cfm += mean_value(a)
        used += 1
    if not used:
        return _not_applicable(item, warnings, "no fan has power and airflow readings")
    notes = [f"ratio of summed means over {used} of {len(fans)} fan(s)"]
    return _rated(item, airflow_efficiency(watts, cfm), ctx, warnings, notes)


def _eval_cse(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    units = ctx.inventory.hvac_units()
    if not units:
        return _not_applicable(item, [], "no HVAC units in inventory")
    kw = tons = 0.0
    used = 0
    for unit in units:
        p = ctx.series(unit.power_sensor_id, warnings, POWER_KINDS)
        load = ctx.series(unit.load_sensor_id, warnings, {SensorKind.COOLING_LOAD_TONS})
        if p is None or load is None:
            continue
        kw += float(power_kw(p).mean())
        tons += mean_value(load)
        used += 1
    if not used:
        return _not_applicable(item, warnings, "no HVAC unit has power and load readings")
    notes = [f"ratio of summed means over {used} of {len(units)} HVAC unit(s)"]
    return _rated(item, cooling_system_efficiency(kw, tons), ctx, warnings, notes)


def eval_global_items(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    evaluators = {
        "PUE": _eval_pue, "DCIE": _eval_dcie, "ERE": _eval_ere,
        "HVACSE": _eval_hvacse, "AE": _eval_ae, "CSE": _eval_cse,
    }
    return evaluators[item.item_id](item, ctx)


# ── IT equipment ─────────────────────────────────────────────
def _eval_cpu_util(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    aggregation = ctx.config.utilization_aggregation
    per_server: list[MetricValue] = []
    for server in ctx.inventory.servers():
        if not server.cpu_utilization_sensor_id:
            warnings.append(f"server '{server.id}' has no CPU utilization sensor")
            continue
        s = ctx.series(server.cpu_utilization_sensor_id, warnings,
                       {SensorKind.CPU_UTILIZATION_PCT})
        if s is None:
            continue
        per_server.append(classify_utilization(s, aggregation, subject=f"server {server.id}"))

    if not per_server:
        return _not_applicable(item, warnings, "no server has CPU utilization readings")

    flagged = [m.subject.removeprefix("server ") for m in per_server
               if m.label != UtilizationClass.CORRECT.value]
    summary = compliance_ratio(len(per_server) - len(flagged), len(per_server))
    summary = summary.model_copy(update={"label": "servers correctly utilized"})
    notes = [f"{aggregation.value} utilization: Under <= {UNDER_UTILIZATION_MAX_PCT:g}%, "
             f"Correct > {UNDER_UTILIZATION_MAX_PCT:g}% and <= {CORRECT_UTILIZATION_MAX_PCT:g}%, "
             f"Over > {CORRECT_UTILIZATION_MAX_PCT:g}%"]
    return _result(item, _pass_if(not flagged), [summary, *per_server],
                   warnings=warnings, notes=notes, flagged=flagged)


def _eval_equip_eff(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    warnings: list[str] = []
    threshold = ctx.config.equip_eff_threshold_gflop_per_w
    per_server: list[MetricValue] = []
    for server in ctx.inventory.servers():
        if not server.in_use:
            warnings.append(f"server '{server.id}' is not in use; skipped")
            continue
        if server.rated_gflops <= 0:
            warnings.append(f"server '{server.id}' has no rated GFLOPS figure; skipped")
            continue
        if server.measured_power_w <= 0:
            warnings.append(f"server '{server.id}' has no measured power; skipped")
            continue
        per_server.append(gflop_per_watt(server.rated_gflops, server.measured_power_w,
                                         subject=f"server {server.id}"))

    if not per_server:
        return _not_applicable(item, warnings, "no server has GFLOPS and power figures")

    flagged = [m.subject.removeprefix("server ") for m in per_server if m.value < threshold]
    summary = compliance_ratio(len(per_server) - len(flagged), len(per_server))
    summary = summary.model_copy(update={"label": f"servers at >= {threshold:g} GFLOP/W"})
    notes = [f"threshold {threshold:g} GFLOP/W"]
    return _result(item, _pass_if(not flagged), [summary, *per_server],
                   warnings=warnings, notes=notes, flagged=flagged)


def eval_it_equipment_items(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    evaluators = {"CPU_UTIL": _eval_cpu_util, "EQUIP_EFF": _eval_equip_eff}
    return evaluators[item.item_id](item, ctx)


# ── Dispatch ─────────────────────────────────────────────────
EVALUATORS: dict[str, Callable[[AuditItem, AuditContext], AuditItemResult]] = {
    "ALT_AISLES": lambda item, ctx: eval_alternating_aisles(ctx.inventory.aisles()),
    **{i: eval_simple_fraction_items for i in (
        "BARRIERS", "CABLING", "MERV", "LED", "DIMMING", "OCCUPANCY",
        "UNUSED_SERVERS", "POWER_SOURCES")},
    **{i: eval_thermal_items for i in ("RTI", "RCI", "AMBIENT_TEMP")},
    **{i: eval_global_items for i in ("PUE", "DCIE", "ERE", "HVACSE", "AE", "CSE")},
    **{i: eval_it_equipment_items for i in ("CPU_UTIL", "EQUIP_EFF")},
}


def evaluate_item(item: AuditItem, ctx: AuditContext) -> AuditItemResult:
    """Evaluate one item; metric errors become NotApplicable results."""
    started = time.perf_counter()
    try:
        result = EVALUATORS[item.item_id](item, ctx)
    except MetricError as e:
        result = _not_applicable(item, [], str(e))
    except ValidationError as e:
        result = _not_applicable(item, [], f"unusable metric inputs: {e.errors()[0]['msg']}")
    for warning in result.warnings:
        logger.warning(f"{item.item_id}: {warning}")
    logger.debug(f"{item.item_id}: {result.compliance.value} "
                 f"in {(time.perf_counter() - started) * 1000:.1f} ms")
    return result


def _utc(ts: datetime) -> datetime:
    return ts.replace(tzinfo=timezone.utc) if ts.tzinfo is None else ts.astimezone(timezone.utc)


def run_audit(inventory: Inventory, telemetry: Telemetry,
              config: Optional[AuditConfig] = None) -> AuditReport:
    """
    Evaluate every item of the configured tier.

    The window defaults to the full telemetry span (or the inventory capture
    instant when there is no telemetry at all).
    """
    config = config or AuditConfig()
    tables = (load_thresholds(config.thresholds_override_path)
              if config.thresholds_override_path else DEFAULT_TABLES)

    if config.window is not None:
        start, end = (_utc(t) for t in config.window)
        if start > end:
            raise InvalidWindow(f"window start {start.isoformat()} is after end {end.isoformat()}")
    else:
        start, end = telemetry_span(telemetry) or (inventory.captured_at, inventory.captured_at)

    ctx = AuditContext(
        inventory=inventory, telemetry=window_all(telemetry, start, end), config=config,
        tables=tables, envelope=envelope_for(config.ashrae_class, tables), window=(start, end),
    )

    report_warnings = [f"sensor '{sid}' referenced by inventory has no telemetry series"
                       for sid in resolve_sensors(inventory.sensor_ids(), telemetry)]
    for warning in report_warnings:
        logger.warning(warning)

    items = items_for_mode(config.mode)
    logger.info(f"🔍 Running {config.mode.value} audit of '{inventory.data_center_id}': "
                f"{len(items)} items, {config.workers} worker(s)")
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda item: evaluate_item(item, ctx), items))
    else:
        results = [evaluate_item(item, ctx) for item in items]

    counts = {c: sum(r.compliance is c for r in results) for c in Compliance}
    logger.info("✅ Audit complete: " + ", ".join(f"{n} {c.value}" for c, n in counts.items()))

    return AuditReport(
        data_center_id=inventory.data_center_id, mode=config.mode, window=(start, end),
        ashrae_class=config.ashrae_class, rti_tolerance_pct=config.rti_tolerance_pct,
        tables_version=tables.version, results=results, warnings=report_warnings,
        generated_at=datetime.now(timezone.utc), tool_version=TOOL_VERSION,
    )
