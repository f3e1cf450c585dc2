"""
Training Energy Estimator: converts training compute (GFLOP) into kWh and
the number of average U.S. homes the same energy would power for a year.

The conversion reproduces the published reference table exactly: GFLOP divided
by GFLOP/W is read as watt-hours, then divided by 1000. That reading is
dimensionally loose (GFLOP/W usually means GFLOP/s per watt, which makes the
quotient watt-seconds); `strict_units=True` applies that reading instead and
yields values 3600x smaller.
"""

import io
import logging
from pathlib import Path
from typing import Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from tabulate import tabulate

from config import ESTIMATOR_GFLOP_PER_WATT, ESTIMATOR_HOME_KWH_PER_MONTH
from modules.errors import InvalidInput, IoError

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0
MONTHS_PER_YEAR = 12

TABLE1_CSV_COLUMNS = ["model", "gflop", "kwh", "homes"]


class TrainingWorkload(BaseModel):
    model_config = ConfigDict(frozen=True)

    model_name: str
    total_gflop: float = Field(gt=0)  # accepts "1.64e11" as well as 1.64e11


class EstimatorParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    gflop_per_watt: float = Field(default=ESTIMATOR_GFLOP_PER_WATT, gt=0)
    home_kwh_per_month: float = Field(default=ESTIMATOR_HOME_KWH_PER_MONTH, gt=0)


class Table1Row(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    gflop: float
    kwh: float
    homes: float


# ── Reference data ───────────────────────────────────────────
# Compute estimates for 17 NLP models, with the consumption and homes columns
# exactly as printed.
TABLE1_PUBLISHED: tuple[tuple[str, float, str, str], ...] = (
    ("T5-Small", 1.8e11, "10,666,034.61", "987.60"),
    ("T5-Base", 6.6e11, "39,108,793.55", "3,621.18"),
    ("T5-Large", 2.31e12, "136,880,777.40", "12,674.15"),
    ("T5-3B", 9e12, "533,301,730.30", "49,379.76"),
    ("T5-11B", 3.3e13, "1,955,439,678", "181,059.23"),
    ("BERT-Base", 1.64e11, "9,717,942.64", "899.81"),
    ("BERT-Large", 5.33e11, "31,583,313.58", "2,924.38"),
    ("RoBERTa-Base", 1.5e12, "88,883,621.71", "8,229.964"),
    ("RoBERTa-Large", 4.26e12, "252,429,485.70", "23,373.10"),
    ("GPT-3 Small", 2.25e11, "13,332,543.26", "1,234.49"),
    ("GPT-3 Medium", 6.41e11, "37,982,934.34", "3,516.94"),
    ("GPT-3 Large", 1.37e12, "81,180,374.50", "7,516.70"),
    ("GPT-3 XL", 2.38e12, "141,028,679.80", "13,058.21"),
    ("GPT-3 2.7B", 4.77e12, "282,649,917", "26,171.29"),
    ("GPT-3 6.7B", 1.2e13, "711,068,973.70", "65,839.72"),
    ("GPT-3 13B", 2.31e13, "1,368,807,774", "126,741.46"),
    ("GPT-3 175B", 3.14e14, "18,606,304,812", "1,722,806"),
)


def published_value(text: str) -> float:
    return float(text.replace(",", ""))


def printed_decimals(text: str) -> int:
    return len(text.split(".")[1]) if "." in text else 0


# ── Estimator ────────────────────────────────────────────────
def consumption_kwh(workload: TrainingWorkload, params: Optional[EstimatorParams] = None,
                    strict_units: bool = False) -> float:
    params = params or EstimatorParams()
    kwh = workload.total_gflop / params.gflop_per_watt / 1000.0
    if strict_units:
        kwh /= SECONDS_PER_HOUR
    return kwh


def homes_powered(kwh: float, params: Optional[EstimatorParams] = None) -> float:
    """Homes powered for one year by `kwh`."""
    if kwh < 0:
        raise InvalidInput(f"homes powered: energy must be non-negative, got {kwh}")
    params = params or EstimatorParams()
    return kwh / (params.home_kwh_per_month * MONTHS_PER_YEAR)


def table1(params: Optional[EstimatorParams] = None, strict_units: bool = False) -> list[Table1Row]:
    """All 17 reference rows, computed from the GFLOP column."""
    rows = []
    for name, gflop, _, _ in TABLE1_PUBLISHED:
        kwh = consumption_kwh(TrainingWorkload(model_name=name, total_gflop=gflop), params,
                              strict_units)
        rows.append(Table1Row(model=name, gflop=gflop, kwh=kwh, homes=homes_powered(kwh, params)))
    return rows


# ── Output ───────────────────────────────────────────────────
def export_table1_csv(rows: list[Table1Row], path=None) -> str:
    """CSV `model,gflop,kwh,homes` at full precision; also written to `path` if given."""
    frame = pd.DataFrame(
        [(r.model, repr(r.gflop), repr(r.kwh), repr(r.homes)) for r in rows],
        columns=TABLE1_CSV_COLUMNS,
    )
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    text = buffer.getvalue()
    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise IoError(f"cannot write table to {path}: {e}") from e
        logger.info(f"Table written to {path}")
    return text


def format_table1(rows: list[Table1Row]) -> str:
    """Human table: computed values at 2 decimals next to the published columns."""
    published = {name: (kwh, homes) for name, _, kwh, homes in TABLE1_PUBLISHED}
    body = []
    for r in rows:
        pub_kwh, pub_homes = published.get(r.model, ("", ""))
        body.append([r.model, f"{r.gflop:.3g}", f"{r.kwh:,.2f}", f"{r.homes:,.2f}",
                     pub_kwh, pub_homes])
    return tabulate(
        body,
        headers=["Model", "GFLOP", "kWh", "Homes", "Published kWh", "Published homes"],
        tablefmt="github", disable_numparse=True,
    )


# ── Test ─────────────────────────────────────────────────────
if __name__ == "__main__":
    print(format_table1(table1()))
