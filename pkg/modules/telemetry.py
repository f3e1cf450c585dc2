"""
Telemetry: timestamped sensor readings, loaded from CSV.

CSV header: timestamp,sensor_id,kind,value,unit
Rows may arrive in any order and interleave sensors; each sensor becomes one
time-ordered TelemetrySeries.
"""

import logging
import math
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from modules.errors import InvalidWindow, IoError, ParseError, ValidationError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["timestamp", "sensor_id", "kind", "value", "unit"]


class SensorKind(str, Enum):
    TEMPERATURE_F = "temperature_f"
    POWER_W = "power_w"
    POWER_KW = "power_kw"
    AIRFLOW_CFM = "airflow_cfm"
    COOLING_LOAD_TONS = "cooling_load_tons"
    ENERGY_KWH_ANNUAL = "energy_kwh_annual"
    CPU_UTILIZATION_PCT = "cpu_utilization_pct"


# Accepted unit spellings per kind; the first one is what we write
UNITS = {
    SensorKind.TEMPERATURE_F: ("F", "degF", "°F"),
    SensorKind.POWER_W: ("W",),
    SensorKind.POWER_KW: ("kW",),
    SensorKind.AIRFLOW_CFM: ("cfm",),
    SensorKind.COOLING_LOAD_TONS: ("tons", "ton"),
    SensorKind.ENERGY_KWH_ANNUAL: ("kWh",),
    SensorKind.CPU_UTILIZATION_PCT: ("%", "pct"),
}
CELSIUS_UNITS = ("C", "degC", "°C")


class TelemetrySeries(BaseModel):
    """One sensor's readings, strictly increasing in time."""

    model_config = ConfigDict(frozen=True)

    sensor_id: str
    kind: SensorKind
    points: tuple[tuple[datetime, float], ...] = ()

    @model_validator(mode="after")
    def _check_points(self):
        previous = None
        for ts, value in self.points:
            if ts.tzinfo is None:
                raise ValueError(f"sensor '{self.sensor_id}': naive timestamp {ts}")
            if not math.isfinite(value):
                raise ValueError(f"sensor '{self.sensor_id}': non-finite value at {ts}")
            if previous is not None and ts <= previous:
                raise ValueError(
                    f"sensor '{self.sensor_id}': timestamps not strictly increasing at {ts}"
                )
            if self.kind is SensorKind.CPU_UTILIZATION_PCT and not 0 <= value <= 100:
                raise ValueError(
                    f"sensor '{self.sensor_id}': utilization {value} outside [0, 100]"
                )
            previous = ts
        return self

    def __len__(self) -> int:
        return len(self.points)

    @property
    def unit(self) -> str:
        return UNITS[self.kind][0]

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points], dtype=float)

    def timestamps(self) -> list[datetime]:
        return [ts for ts, _ in self.points]

    def start(self) -> Optional[datetime]:
        return self.points[0][0] if self.points else None

    def end(self) -> Optional[datetime]:
        return self.points[-1][0] if self.points else None


Telemetry = Mapping[str, TelemetrySeries]


def _utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    """RFC 3339, UTC, second precision unless sub-second data exists."""
    ts = _utc(ts)
    text = ts.isoformat(timespec="microseconds" if ts.microsecond else "seconds")
    return text.replace("+00:00", "Z")


# ── Loading ──────────────────────────────────────────────────
def _fail_rows(frame: pd.DataFrame, mask: pd.Series, path: str, field: str, message: str):
    if mask.any():
        first = frame.index[mask.to_numpy()][0]
        # +2: header row and 1-based lines
        raise ParseError(message.format(frame.loc[first, field]), path=path,
                         line=int(first) + 2, field=field)


def load_telemetry(path) -> dict[str, TelemetrySeries]:
    """
    Load a telemetry CSV into one TelemetrySeries per sensor.

    Celsius temperature rows are converted to °F here, the only place a
    conversion happens.
    """
    path = Path(path)
    src = str(path)
    if not path.is_file():
        raise ParseError("telemetry file does not exist", path=src)

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8",
                            skip_blank_lines=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise ParseError(f"failed to read CSV: {e}", path=src) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError("empty telemetry file (header required)", path=src) from e

    if list(frame.columns) != CSV_COLUMNS:
        raise ParseError(
            f"expected header {','.join(CSV_COLUMNS)}, got {','.join(frame.columns)}",
            path=src, line=1,
        )

    # Blank lines are dropped without renumbering, so index + 2 stays the file line
    if len(frame):
        blank = frame.fillna("").apply(lambda col: col.str.strip() == "").all(axis=1)
        frame = frame.loc[~blank.astype(bool)].copy()

    frame["ts"] = pd.to_datetime(frame["timestamp"], utc=True, errors="coerce", format="ISO8601")
    _fail_rows(frame, frame["ts"].isna(), src, "timestamp", "invalid RFC 3339 timestamp '{}'")

    frame["num"] = pd.to_numeric(frame["value"], errors="coerce").astype(float)
    _fail_rows(frame, frame["num"].isna(), src, "value", "invalid numeric value '{}'")
    _fail_rows(frame, ~np.isfinite(frame["num"]), src, "value", "non-finite value '{}'")

    known_kinds = {k.value for k in SensorKind}
    _fail_rows(frame, ~frame["kind"].isin(known_kinds), src, "kind", "unknown kind '{}'")
    _fail_rows(frame, frame["sensor_id"].str.strip() == "", src, "sensor_id", "empty sensor_id{}")

    # Units must agree with kind; temperature may declare Celsius
    is_temp = frame["kind"] == SensorKind.TEMPERATURE_F.value
    is_celsius = is_temp & frame["unit"].isin(CELSIUS_UNITS)
    if len(frame):
        accepted = frame.apply(lambda row: row["unit"] in UNITS[SensorKind(row["kind"])], axis=1)
        bad_unit = ~(accepted | is_celsius)
        if bad_unit.any():
            first = frame.index[bad_unit.to_numpy()][0]
            raise ValidationError(
                f"{src}: line {int(first) + 2}: unit '{frame.loc[first, 'unit']}' "
                f"does not match kind '{frame.loc[first, 'kind']}'"
            )
    frame.loc[is_celsius, "num"] = frame.loc[is_celsius, "num"] * 9.0 / 5.0 + 32.0

    series: dict[str, TelemetrySeries] = {}
    for sensor_id, group in frame.groupby("sensor_id", sort=True):
        kinds = group["kind"].unique()
        if len(kinds) > 1:
            raise ValidationError(f"{src}: sensor '{sensor_id}' declares several kinds: {sorted(kinds)}")
        group = group.sort_values("ts", kind="stable")
        if group["ts"].duplicated().any():
            dup = group.loc[group["ts"].duplicated(), "timestamp"].iloc[0]
            raise ValidationError(
                f"{src}: sensor '{sensor_id}': non-monotonic timestamps (repeated {dup})"
            )
        if kinds[0] == SensorKind.CPU_UTILIZATION_PCT.value:
            out_of_range = ~group["num"].between(0, 100)
            if out_of_range.any():
                raise ValidationError(
                    f"{src}: sensor '{sensor_id}': utilization "
                    f"{group.loc[out_of_range, 'num'].iloc[0]} outside [0, 100]"
                )
        points = tuple(
            (ts.to_pydatetime(), float(v)) for ts, v in zip(group["ts"], group["num"])
        )
        series[str(sensor_id)] = TelemetrySeries(
            sensor_id=str(sensor_id), kind=SensorKind(kinds[0]), points=points
        )

    logger.info(f"Loaded telemetry: {len(frame)} rows, {len(series)} series from {path.name}")
    return series


def telemetry_frame(telemetry: Telemetry) -> pd.DataFrame:
    rows = [
        (format_timestamp(ts), s.sensor_id, s.kind.value, repr(float(v)), s.unit)
        for s in telemetry.values()
        for ts, v in s.points
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_telemetry(telemetry: Telemetry, path) -> Path:
    """Write telemetry in the load_telemetry format (rows sorted by time, then sensor)."""
    path = Path(path)
    frame = telemetry_frame(telemetry).sort_values(["timestamp", "sensor_id"], kind="stable")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write telemetry to {path}: {e}") from e
    return path


# ── Windowing & aggregation ──────────────────────────────────
def window(series: TelemetrySeries, start: datetime, end: datetime) -> TelemetrySeries:
    """Sub-series with start <= t <= end (both ends inclusive)."""
    start, end = _utc(start), _utc(end)
    if start > end:
        raise InvalidWindow(f"window start {start.isoformat()} is after end {end.isoformat()}")
    points = tuple(p for p in series.points if start <= p[0] <= end)
    return series.model_copy(update={"points": points})


def window_all(telemetry: Telemetry, start: datetime, end: datetime) -> dict[str, TelemetrySeries]:
    return {sid: window(s, start, end) for sid, s in telemetry.items()}


def telemetry_span(telemetry: Telemetry) -> Optional[tuple[datetime, datetime]]:
    """Full time span covered by any series, or None when there are no points."""
    starts = [s.start() for s in telemetry.values() if len(s)]
    ends = [s.end() for s in telemetry.values() if len(s)]
    if not starts:
        return None
    return min(starts), max(ends)


def mean_value(series: TelemetrySeries) -> Optional[float]:
    if not len(series):
        return None
    return float(np.mean(series.values()))


def power_kw(series: TelemetrySeries) -> np.ndarray:
    """Power readings in kW regardless of the stored unit."""
    if series.kind is SensorKind.POWER_KW:
        return series.values()
    if series.kind is SensorKind.POWER_W:
        return series.values() / 1000.0
    raise ValidationError(f"sensor '{series.sensor_id}' is {series.kind.value}, not a power series")


def power_w(series: TelemetrySeries) -> np.ndarray:
    return power_kw(series) * 1000.0


def energy_kwh(series: TelemetrySeries) -> Optional[float]:
    """Trapezoidal integral of a power series in kWh; None with fewer than 2 points."""
    if len(series) < 2:
        return None
    kw = power_kw(series)
    hours = np.array([(ts - series.points[0][0]).total_seconds() / 3600.0
                      for ts in series.timestamps()])
    return float(np.sum((kw[1:] + kw[:-1]) / 2.0 * np.diff(hours)))


def resolve_sensors(sensor_ids, telemetry: Telemetry) -> list[str]:
    """Sensor ids with no loaded series, in the order given."""
    return [sid for sid in dict.fromkeys(sensor_ids) if sid not in telemetry]
