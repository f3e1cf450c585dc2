"""
Metrics core: every audit formula as a pure function.

Numbers in, MetricValue out. No I/O, no benchmark rating (see benchmarks.py).
Errors are MetricError subclasses; the audit engine turns them into
NotApplicable results.
"""

import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Annotated, Iterable, Optional, Sequence

import numpy as np
from pydantic import (
    BaseModel, ConfigDict, PlainSerializer, PlainValidator, field_validator, model_validator,
)

from modules.errors import DivisionByZero, EmptyInput, InvalidInput, NegativeResult
from modules.inventory import PowerKind, PowerSource
from modules.telemetry import TelemetrySeries

logger = logging.getLogger(__name__)


class MetricId(str, Enum):
    PUE = "PUE"
    DCIE = "DCIE"
    ERE = "ERE"
    HVACSE = "HVACSE"
    AE = "AE"
    CSE = "CSE"
    RTI = "RTI"
    RCI_HI = "RCI_HI"
    RCI_LO = "RCI_LO"
    COMPLIANCE_RATIO = "ComplianceRatio"
    RENEWABLE_FRACTION = "RenewableFraction"
    UNUSED_FRACTION = "UnusedFraction"
    GFLOP_PER_WATT = "GflopPerWatt"
    UTILIZATION_CLASS = "UtilizationClass"


RATIO_METRICS = {
    MetricId.PUE, MetricId.DCIE, MetricId.ERE, MetricId.HVACSE,
    MetricId.COMPLIANCE_RATIO, MetricId.RENEWABLE_FRACTION, MetricId.UNUSED_FRACTION,
}


class MetricValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric_id: MetricId
    value: float
    unit: str = ""
    subject: str = "data_center"
    label: Optional[str] = None
    inputs_digest: str = ""

    @field_validator("value")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"metric value must be finite, got {value}")
        return value

    @model_validator(mode="after")
    def _non_negative_ratio(self):
        if self.metric_id in RATIO_METRICS and self.value < 0:
            raise ValueError(f"{self.metric_id.value} cannot be negative ({self.value})")
        return self


class ThermalEnvelope(BaseModel):
    """Temperature limits in °F: allowable band wraps the recommended band."""

    model_config = ConfigDict(frozen=True)

    min_allow_f: float
    min_rec_f: float
    max_rec_f: float
    max_allow_f: float

    @model_validator(mode="after")
    def _ordered(self):
        if not self.min_allow_f < self.min_rec_f < self.max_rec_f < self.max_allow_f:
            raise ValueError(
                "envelope must satisfy min_allow < min_rec < max_rec < max_allow, got "
                f"({self.min_allow_f}, {self.min_rec_f}, {self.max_rec_f}, {self.max_allow_f})"
            )
        return self


class Band(str, Enum):
    RECOMMENDED = "recommended"
    ALLOWABLE = "allowable"


class Aggregation(str, Enum):
    MEAN = "mean"
    MAX = "max"


class UtilizationClass(str, Enum):
    UNDER = "Under"
    CORRECT = "Correct"
    OVER = "Over"


UNDER_UTILIZATION_MAX_PCT = 50.0
CORRECT_UTILIZATION_MAX_PCT = 85.0


def _check_inputs(what: str, **inputs: float) -> None:
    for name, value in inputs.items():
        if not math.isfinite(value):
            raise InvalidInput(f"{what}: {name} must be finite, got {value}")
        if value < 0:
            raise InvalidInput(f"{what}: {name} must be non-negative, got {value}")


def _divide(numerator: float, denominator: float, what: str) -> float:
    if denominator == 0:
        raise DivisionByZero(f"{what}: denominator is zero")
    value = numerator / denominator
    if not math.isfinite(value):
        raise InvalidInput(f"{what}: ratio overflows ({numerator!r} / {denominator!r})")
    return value


# ── Global metrics ───────────────────────────────────────────
def pue(facility_power: float, it_power: float, subject: str = "data_center") -> MetricValue:
    """Total facility power / IT equipment power (both kW)."""
    _check_inputs("PUE", facility_power=facility_power, it_power=it_power)
    value = _divide(facility_power, it_power, "PUE")
    if facility_power < it_power:
        logger.warning(
            f"PUE: facility power {facility_power:.3f} kW below IT power {it_power:.3f} kW"
        )
    return MetricValue(
        metric_id=MetricId.PUE, value=value, subject=subject,
        inputs_digest=f"facility={facility_power!r} kW; it={it_power!r} kW",
    )


def dcie(pue_value: float, subject: str = "data_center") -> MetricValue:
    if not math.isfinite(pue_value):
        raise InvalidInput(f"DCIE: PUE must be finite, got {pue_value}")
    if pue_value <= 0:
        raise DivisionByZero(f"DCIE: PUE must be positive, got {pue_value}")
    return MetricValue(
        metric_id=MetricId.DCIE, value=1.0 / pue_value, subject=subject,
        inputs_digest=f"1/PUE; PUE={pue_value!r}",
    )


def ere(
    cooling: float,
    power_dist: float,
    lighting: float,
    it: float,
    reuse: float,
    subject: str = "data_center",
) -> MetricValue:
    """(cooling + power distribution + lighting + IT - reuse) / IT, energies in kWh."""
    _check_inputs("ERE", cooling=cooling, power_dist=power_dist, lighting=lighting,
                  it=it, reuse=reuse)
    total = cooling + power_dist + lighting + it
    if reuse > total:
        raise NegativeResult(f"ERE: reuse {reuse} kWh exceeds total energy {total} kWh")
    value = _divide(total - reuse, it, "ERE")
    return MetricValue(
        metric_id=MetricId.ERE, value=value, subject=subject,
        inputs_digest=(f"cooling={cooling!r}; power_dist={power_dist!r}; "
                       f"lighting={lighting!r}; it={it!r}; reuse={reuse!r} kWh"),
    )


def hvacse(it_energy: float, hvac_energy: float, subject: str = "data_center") -> MetricValue:
    _check_inputs("HVACSE", it_energy=it_energy, hvac_energy=hvac_energy)
    value = _divide(it_energy, hvac_energy, "HVACSE")
    return MetricValue(
        metric_id=MetricId.HVACSE, value=value, subject=subject,
        inputs_digest=f"it={it_energy!r} kWh/yr; hvac={hvac_energy!r} kWh/yr",
    )


def airflow_efficiency(total_fan_power: float, total_airflow: float,
                       subject: str = "data_center") -> MetricValue:
    _check_inputs("AE", total_fan_power=total_fan_power, total_airflow=total_airflow)
    value = _divide(total_fan_power, total_airflow, "AE")
    return MetricValue(
        metric_id=MetricId.AE, value=value, unit="W/cfm", subject=subject,
        inputs_digest=f"fan_power={total_fan_power!r} W; airflow={total_airflow!r} cfm",
    )


def cooling_system_efficiency(mean_cooling_power: float, mean_cooling_load: float,
                              subject: str = "data_center") -> MetricValue:
    # denominator is tons of cooling load
    _check_inputs("CSE", mean_cooling_power=mean_cooling_power,
                  mean_cooling_load=mean_cooling_load)
    value = _divide(mean_cooling_power, mean_cooling_load, "CSE")
    return MetricValue(
        metric_id=MetricId.CSE, value=value, unit="kW/ton", subject=subject,
        inputs_digest=f"cooling_power={mean_cooling_power!r} kW; load={mean_cooling_load!r} tons",
    )


# ── Thermal ──────────────────────────────────────────────────
def rti_flag(value: float) -> str:
    if value < 100.0:
        return "bypass"
    if value > 100.0:
        return "recirculation"
    return "optimal"


def rti(return_temp: float, supply_temp: float, equipment_delta_t: float,
        subject: str = "data_center") -> MetricValue:
    """Return Temperature Index, percent: 100 * (return - supply) / equipment ΔT."""
    if equipment_delta_t <= 0:
        raise DivisionByZero(f"RTI: equipment ΔT must be positive, got {equipment_delta_t}")
    if return_temp < supply_temp:
        raise InvalidInput(f"RTI: return {return_temp}°F below supply {supply_temp}°F")
    value = 100.0 * (return_temp - supply_temp) / equipment_delta_t
    return MetricValue(
        metric_id=MetricId.RTI, value=value, unit="%", subject=subject, label=rti_flag(value),
        inputs_digest=(f"return={return_temp!r}°F; supply={supply_temp!r}°F; "
                       f"equipment_dT={equipment_delta_t!r}°F"),
    )


def equipment_delta_t(racks: Sequence[tuple[float, float, Optional[float]]]) -> float:
    """
    Mean (exhaust - intake) over racks given as (intake, exhaust, airflow).

    Airflow-weighted when every rack has a positive airflow, unweighted otherwise.
    """
    if not racks:
        raise EmptyInput("equipment ΔT: no racks with intake and exhaust readings")
    deltas = np.array([exhaust - intake for intake, exhaust, _ in racks], dtype=float)
    flows = [flow for _, _, flow in racks]
    if all(flow is not None and flow > 0 for flow in flows):
        return float(np.average(deltas, weights=np.array(flows, dtype=float)))
    return float(np.mean(deltas))


def rci(intake_temps: Iterable[float], envelope: ThermalEnvelope,
        subject: str = "data_center") -> tuple[MetricValue, MetricValue]:
    """Rack Cooling Index (HI, LO), each clamped to [0, 100]."""
    temps = np.asarray(list(intake_temps), dtype=float)
    if temps.size == 0:
        raise EmptyInput("RCI: no intake temperatures")
    n = temps.size

    over = np.clip(temps - envelope.max_rec_f, 0.0, None).sum()
    under = np.clip(envelope.min_rec_f - temps, 0.0, None).sum()
    hi = max(0.0, 1.0 - over / (n * (envelope.max_allow_f - envelope.max_rec_f))) * 100.0
    lo = max(0.0, 1.0 - under / (n * (envelope.min_rec_f - envelope.min_allow_f))) * 100.0

    digest = f"n={n}; over_sum={float(over)!r}°F; under_sum={float(under)!r}°F"
    return (
        MetricValue(metric_id=MetricId.RCI_HI, value=float(hi), unit="%", subject=subject,
                    inputs_digest=digest),
        MetricValue(metric_id=MetricId.RCI_LO, value=float(lo), unit="%", subject=subject,
                    inputs_digest=digest),
    )


def compliance_ratio(compliant: int, total: int, subject: str = "data_center") -> MetricValue:
    if total == 0:
        raise DivisionByZero("compliance ratio: no items to audit")
    if not 0 <= compliant <= total:
        raise InvalidInput(f"compliance ratio: {compliant} compliant of {total}")
    return MetricValue(
        metric_id=MetricId.COMPLIANCE_RATIO, value=compliant / total, subject=subject,
        inputs_digest=f"{compliant}/{total}",
    )


def in_band(value: float, envelope: ThermalEnvelope, band: Band) -> bool:
    # closed interval: a reading exactly on a limit complies
    if band is Band.RECOMMENDED:
        return envelope.min_rec_f <= value <= envelope.max_rec_f
    return envelope.min_allow_f <= value <= envelope.max_allow_f


def ambient_compliance(readings: TelemetrySeries, envelope: ThermalEnvelope,
                       band: Band, subject: str = "data_center") -> MetricValue:
    """Fraction of ambient readings inside the chosen band."""
    return ambient_compliance_values(readings.values(), envelope, band, subject,
                                     sensor=readings.sensor_id)


def ambient_compliance_values(values: Sequence[float], envelope: ThermalEnvelope, band: Band,
                              subject: str = "data_center", sensor: str = "") -> MetricValue:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyInput("ambient compliance: no readings")
    if band is Band.RECOMMENDED:
        lo, hi = envelope.min_rec_f, envelope.max_rec_f
    else:
        lo, hi = envelope.min_allow_f, envelope.max_allow_f
    ok = int(np.count_nonzero((values >= lo) & (values <= hi)))
    return MetricValue(
        metric_id=MetricId.COMPLIANCE_RATIO, value=ok / values.size, subject=subject,
        label=band.value,
        inputs_digest=f"{ok}/{values.size} readings in [{lo}, {hi}]°F {sensor}".rstrip(),
    )


# ── IT equipment ─────────────────────────────────────────────
def utilization_class(u: float) -> UtilizationClass:
    # over-utilization starts above 85%
    if u <= UNDER_UTILIZATION_MAX_PCT:
        return UtilizationClass.UNDER
    if u <= CORRECT_UTILIZATION_MAX_PCT:
        return UtilizationClass.CORRECT
    return UtilizationClass.OVER


def classify_utilization(samples: TelemetrySeries, aggregation: Aggregation = Aggregation.MEAN,
                         subject: str = "") -> MetricValue:
    values = samples.values()
    if values.size == 0:
        raise EmptyInput(f"utilization: no samples for '{samples.sensor_id}'")
    aggregation = Aggregation(aggregation)
    u = float(values.mean() if aggregation is Aggregation.MEAN else values.max())
    return MetricValue(
        metric_id=MetricId.UTILIZATION_CLASS, value=u, unit="%",
        subject=subject or samples.sensor_id, label=utilization_class(u).value,
        inputs_digest=f"{aggregation.value} of {values.size} samples from {samples.sensor_id}",
    )


def gflop_per_watt(rated_gflops: float, power_w: float, subject: str = "") -> MetricValue:
    _check_inputs("GFLOP/W", rated_gflops=rated_gflops, power_w=power_w)
    value = _divide(rated_gflops, power_w, "GFLOP/W")
    return MetricValue(
        metric_id=MetricId.GFLOP_PER_WATT, value=value, unit="GFLOP/W", subject=subject,
        inputs_digest=f"gflops={rated_gflops!r}; power={power_w!r} W",
    )


# ── Power distribution ───────────────────────────────────────
def renewable_fraction(sources: Sequence[PowerSource]) -> MetricValue:
    total = sum(s.energy_supplied_kwh for s in sources)
    renewable = sum(s.energy_supplied_kwh for s in sources if s.kind is PowerKind.RENEWABLE)
    value = _divide(renewable, total, "renewable fraction")
    return MetricValue(
        metric_id=MetricId.RENEWABLE_FRACTION, value=value,
        inputs_digest=f"renewable={renewable!r} kWh; total={total!r} kWh; sources={len(sources)}",
    )


# ── Savings estimates ────────────────────────────────────────
SETPOINT_SAVINGS_PER_F = (Fraction(4, 100), Fraction(5, 100))
BARRIER_FAN_SAVINGS = (Fraction(20, 100), Fraction(25, 100))
LED_SAVINGS = Fraction(75, 100)


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("savings bounds must be exact (int, Fraction or 'p/q' string)")
    return Fraction(value)


# JSON form is the exact "p/q" string
ExactFraction = Annotated[
    Fraction,
    PlainValidator(_to_fraction),
    PlainSerializer(str, return_type=str),
]


class SavingsRange(BaseModel):
    """Advisory savings range with exact bounds."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    low: ExactFraction
    high: ExactFraction
    unit: str
    basis: str

    def as_floats(self) -> tuple[float, float]:
        return float(self.low), float(self.high)


def _nonneg(value, what: str) -> Fraction:
    value = Fraction(value)
    if value < 0:
        raise InvalidInput(f"{what} must be non-negative, got {value}")
    return value


def setpoint_savings(delta_t_f) -> SavingsRange:
    """Energy-cost savings for raising the ambient setpoint by ΔT °F (4-5% per °F)."""
    dt = _nonneg(delta_t_f, "ΔT")
    low, high = SETPOINT_SAVINGS_PER_F
    return SavingsRange(low=low * dt, high=high * dt, unit="fraction of energy cost",
                        basis=f"raise setpoint by {float(dt):g}°F at 4-5% per °F")


def barrier_savings(barrier_count_fixed: int) -> SavingsRange:
    """Fan-energy savings for installing barriers on non-compliant aisles."""
    count = _nonneg(barrier_count_fixed, "barrier count")
    if count == 0:
        return SavingsRange(low=Fraction(0), high=Fraction(0), unit="fraction of fan energy",
                            basis="no aisles to retrofit")
    low, high = BARRIER_FAN_SAVINGS
    return SavingsRange(low=low, high=high, unit="fraction of fan energy",
                        basis=f"install barriers on {count} aisle(s)")


def led_savings(replaced_power_w) -> SavingsRange:
    """Watts saved by swapping incandescent lamps of the given total power for LEDs."""
    watts = _nonneg(replaced_power_w, "replaced lamp power")
    saved = LED_SAVINGS * watts
    return SavingsRange(low=saved, high=saved, unit="W",
                        basis=f"replace {float(watts):g} W of incandescent lamps at 75% less energy")
