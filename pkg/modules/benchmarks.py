"""
Benchmark tables: ASHRAE thermal envelopes, DOE metric scores and MERV rules.

The tables are versioned constant data. An optional JSON thresholds file can
replace any triple or envelope for organizations that adopted newer guidance:

    {
      "version": "site-2025",
      "metrics": {"PUE": {"standard": 1.8, "good": 1.3, "better": 1.1}},
      "envelopes": {"class1": [59, 64.4, 80.6, 89.6]}
    }
"""

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Optional

import pydantic
from pydantic import BaseModel, ConfigDict, Field

from modules.errors import ParseError, ValidationError
from modules.inventory import AirFilter, FilterPurpose
from modules.metrics import MetricId, MetricValue, ThermalEnvelope

logger = logging.getLogger(__name__)

# Thresholds are inclusive up to float noise from windowed ratios
# (e.g. 1.4000000000000001).
THRESHOLD_SLACK = 1e-9


class Direction(str, Enum):
    LOWER = "lower_is_better"
    HIGHER = "higher_is_better"
    TARGET_100 = "closer_to_100_is_better"


class Rating(str, Enum):
    BETTER = "Better"
    GOOD = "Good"
    STANDARD = "Standard"
    BELOW_STANDARD = "BelowStandard"
    NOT_RATED = "NotRated"


class AshraeClass(int, Enum):
    CLASS1 = 1
    CLASS2 = 2


_DIRECTIONS = {
    MetricId.PUE: Direction.LOWER,
    MetricId.ERE: Direction.LOWER,
    MetricId.AE: Direction.LOWER,
    MetricId.CSE: Direction.LOWER,
    MetricId.UNUSED_FRACTION: Direction.LOWER,
    MetricId.DCIE: Direction.HIGHER,
    MetricId.HVACSE: Direction.HIGHER,
    MetricId.RCI_HI: Direction.HIGHER,
    MetricId.RCI_LO: Direction.HIGHER,
    MetricId.COMPLIANCE_RATIO: Direction.HIGHER,
    MetricId.RENEWABLE_FRACTION: Direction.HIGHER,
    MetricId.GFLOP_PER_WATT: Direction.HIGHER,
    MetricId.RTI: Direction.TARGET_100,
    MetricId.UTILIZATION_CLASS: Direction.HIGHER,
}


def better_direction(metric_id: MetricId) -> Direction:
    return _DIRECTIONS[MetricId(metric_id)]


class Thresholds(BaseModel):
    model_config = ConfigDict(frozen=True)

    standard: float
    good: float
    better: float
    direction: Direction


class BenchmarkRating(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric_id: MetricId
    value: float
    rating: Rating
    thresholds_used: Optional[Thresholds] = None


class MervRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    purpose: FilterPurpose
    min_rating: int
    max_rating: Optional[int] = None  # None: no upper bound

    def allows(self, merv: int) -> bool:
        return merv >= self.min_rating and (self.max_rating is None or merv <= self.max_rating)


# ── Embedded tables ──────────────────────────────────────────
TABLES_VERSION = "doe-ashrae-2021"

# DOE scores: (standard, good, better)
DOE_SCORES = {
    MetricId.PUE: (2.0, 1.4, 1.1),
    MetricId.DCIE: (0.5, 0.7, 0.9),
    MetricId.HVACSE: (0.7, 1.4, 2.5),
    MetricId.AE: (1.25, 0.75, 0.5),   # W/cfm
    MetricId.CSE: (1.1, 0.8, 0.6),    # kW/ton
}

# ASHRAE envelopes (min_allow, min_rec, max_rec, max_allow) in °F
ASHRAE_ENVELOPES = {
    AshraeClass.CLASS1: (59.0, 64.4, 80.6, 89.6),
    AshraeClass.CLASS2: (50.0, 64.4, 80.6, 95.0),
}

MERV_RULES = {
    FilterPurpose.EXTERNAL_INTAKE: MervRule(
        purpose=FilterPurpose.EXTERNAL_INTAKE, min_rating=11, max_rating=13),
    # internal air "can use MERV 8": 8 is a floor, finer filters still comply
    FilterPurpose.INTERNAL_RECIRCULATION: MervRule(
        purpose=FilterPurpose.INTERNAL_RECIRCULATION, min_rating=8),
}


class BenchmarkTables(BaseModel):
    model_config = ConfigDict(frozen=True)

    version: str = TABLES_VERSION
    scores: dict[MetricId, tuple[float, float, float]] = Field(
        default_factory=lambda: dict(DOE_SCORES))
    envelopes: dict[AshraeClass, ThermalEnvelope] = Field(
        default_factory=lambda: {
            cls: ThermalEnvelope(min_allow_f=a, min_rec_f=b, max_rec_f=c, max_allow_f=d)
            for cls, (a, b, c, d) in ASHRAE_ENVELOPES.items()
        })


DEFAULT_TABLES = BenchmarkTables()


# ── Operations ───────────────────────────────────────────────
def _meets(value: float, threshold: float, direction: Direction) -> bool:
    if direction is Direction.LOWER:
        return value <= threshold + THRESHOLD_SLACK
    return value >= threshold - THRESHOLD_SLACK


def rate(metric: MetricValue, tables: BenchmarkTables = DEFAULT_TABLES) -> BenchmarkRating:
    """Rate a metric against its DOE score row; metrics without a row are NotRated."""
    triple = tables.scores.get(metric.metric_id)
    if triple is None:
        return BenchmarkRating(metric_id=metric.metric_id, value=metric.value,
                               rating=Rating.NOT_RATED)

    direction = better_direction(metric.metric_id)
    standard, good, better = triple
    if _meets(metric.value, better, direction):
        rating = Rating.BETTER
    elif _meets(metric.value, good, direction):
        rating = Rating.GOOD
    elif _meets(metric.value, standard, direction):
        rating = Rating.STANDARD
    else:
        rating = Rating.BELOW_STANDARD

    return BenchmarkRating(
        metric_id=metric.metric_id, value=metric.value, rating=rating,
        thresholds_used=Thresholds(standard=standard, good=good, better=better,
                                   direction=direction),
    )


def envelope_for(ashrae_class, tables: BenchmarkTables = DEFAULT_TABLES) -> ThermalEnvelope:
    return tables.envelopes[AshraeClass(int(ashrae_class))]


def check_filter(air_filter: AirFilter) -> bool:
    return MERV_RULES[air_filter.purpose].allows(air_filter.merv_rating)


def filter_warnings(air_filter: AirFilter) -> list[str]:
    if air_filter.purpose is FilterPurpose.EXTERNAL_INTAKE and air_filter.merv_rating > 13:
        return [f"filter '{air_filter.id}': MERV {air_filter.merv_rating} above 13 on external "
                f"intake adds pressure drop (fan energy)"]
    return []


# ── Overrides ────────────────────────────────────────────────
class _ScoreOverride(BaseModel):
    model_config = ConfigDict(extra="forbid")

    standard: float
    good: float
    better: float


class _OverrideFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: str = "override"
    metrics: dict[str, _ScoreOverride] = {}
    envelopes: dict[str, tuple[float, float, float, float]] = {}


_CLASS_KEYS = {"class1": AshraeClass.CLASS1, "class2": AshraeClass.CLASS2,
               "1": AshraeClass.CLASS1, "2": AshraeClass.CLASS2}


def load_thresholds(path) -> BenchmarkTables:
    """Embedded tables with the entries from a thresholds override file applied."""
    path = Path(path)
    try:
        raw = _OverrideFile.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except OSError as e:
        raise ParseError(f"cannot read thresholds file: {e}", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"thresholds file is not valid UTF-8: {e.reason}",
                         path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=str(path), line=e.lineno) from e
    except pydantic.ValidationError as e:
        err = e.errors()[0]
        raise ParseError(err["msg"], path=str(path),
                         field=".".join(str(p) for p in err["loc"])) from e

    scores = dict(DEFAULT_TABLES.scores)
    for name, triple in raw.metrics.items():
        try:
            metric_id = MetricId(name)
        except ValueError:
            raise ValidationError(f"{path}: unknown metric '{name}' in thresholds file")
        if metric_id not in DOE_SCORES:
            raise ValidationError(f"{path}: metric '{name}' has no benchmark row")
        ordered = (triple.standard, triple.good, triple.better)
        direction = better_direction(metric_id)
        monotone = sorted(ordered, reverse=direction is Direction.LOWER)
        if list(ordered) != monotone:
            raise ValidationError(f"{path}: thresholds for '{name}' are not ordered "
                                  f"standard -> good -> better ({direction.value})")
        scores[metric_id] = ordered

    envelopes = dict(DEFAULT_TABLES.envelopes)
    for key, quad in raw.envelopes.items():
        cls = _CLASS_KEYS.get(key.lower())
        if cls is None:
            raise ValidationError(f"{path}: unknown ASHRAE class '{key}'")
        try:
            envelopes[cls] = ThermalEnvelope(min_allow_f=quad[0], min_rec_f=quad[1],
                                             max_rec_f=quad[2], max_allow_f=quad[3])
        except pydantic.ValidationError as e:
            raise ValidationError(f"{path}: envelope '{key}': {e.errors()[0]['msg']}") from e

    logger.info(f"Loaded benchmark overrides '{raw.version}' from {path.name}")
    return BenchmarkTables(version=raw.version, scores=scores, envelopes=envelopes)


# ── Test ─────────────────────────────────────────────────────
if __name__ == "__main__":
    from modules.metrics import pue
    for value in (2.5, 2.0, 1.4, 1.1):
        r = rate(pue(value, 1.0))
        print(f"PUE {value:>4}: {r.rating.value}")
