"""
Reporting: renders audit reports as JSON or Markdown, exports metric time
series for external plotting, and diffs two reports for goal tracking.

JSON is the lossless form: parse_report(render(r, "json")) == r.
Markdown is for people and goes through templates/report_template.md.
"""

import io
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Optional

import pandas as pd
import pydantic
from pydantic import BaseModel, ConfigDict
from tabulate import tabulate

from config import REPORT_TEMPLATE
from modules.audit_engine import AuditItemResult, AuditReport, Compliance
from modules.benchmarks import Direction, Rating, better_direction
from modules.errors import IoError, MismatchedReports, ParseError
from modules.inventory import Inventory
from modules.metrics import MetricId
from modules.telemetry import SensorKind, Telemetry, format_timestamp

logger = logging.getLogger(__name__)


class ReportFormat(str, Enum):
    JSON = "json"
    MARKDOWN = "md"


TIMESERIES_COLUMNS = ["timestamp", "series", "value", "unit"]
GLOBAL_ITEMS = ("PUE", "DCIE", "ERE", "HVACSE", "AE", "CSE")

_STATUS_ICON = {
    Compliance.PASS: "✅",
    Compliance.FAIL: "❌",
    Compliance.PARTIAL_NUMERIC: "📈",
    Compliance.NOT_APPLICABLE: "➖",
}


# ── JSON ─────────────────────────────────────────────────────
def render_json(report: AuditReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def parse_report(text: str, source: str = "<report>") -> AuditReport:
    """Inverse of render_json."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path=source, line=e.lineno) from e
    try:
        return AuditReport.model_validate(payload)
    except pydantic.ValidationError as e:
        err = e.errors()[0]
        raise ParseError(err["msg"], path=source,
                         field=".".join(str(p) for p in err["loc"])) from e


def load_report(path) -> AuditReport:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read report: {e}", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"report is not valid UTF-8: {e.reason}",
                         path=str(path)) from e
    return parse_report(text, source=str(path))


# ── Markdown ─────────────────────────────────────────────────
def _num(value: float) -> str:
    return f"{value:,.2f}"


def _bullets(title: str, lines: list[str]) -> list[str]:
    if not lines:
        return []
    return [f"**{title}:**", "", *[f"- {line}" for line in lines], ""]


def _render_item(result: AuditItemResult) -> list[str]:
    icon = _STATUS_ICON[result.compliance]
    out = [f"### {result.title} (`{result.item_id}`)", "",
           f"{icon} **{result.compliance.value}** · {result.tier.value} · "
           f"level: {result.level.value}", ""]

    if result.metrics:
        rows = [[m.metric_id.value, m.subject, _num(m.value), m.unit, m.label or ""]
                for m in result.metrics]
        out += [tabulate(rows, headers=["Metric", "Subject", "Value", "Unit", "Label"],
                         tablefmt="github", disable_numparse=True), ""]
    if result.rating is not None:
        out += [f"Benchmark rating: **{result.rating.rating.value}**", ""]
    if result.savings is not None:
        low, high = result.savings.as_floats()
        span = _num(low) if low == high else f"{_num(low)} to {_num(high)}"
        if result.savings.unit.startswith("fraction"):
            span = (f"{low:.0%}" if low == high else f"{low:.0%} to {high:.0%}")
        out += [f"Estimated savings: {span} {result.savings.unit} "
                f"({result.savings.basis})", ""]

    out += [f"**Goal:** {result.goal_statement}", ""]
    out += _bullets("Actions", result.actions)
    out += _bullets("Non-compliant", result.flagged)
    out += _bullets("Notes", result.notes)
    out += _bullets("Warnings", result.warnings)
    return out


def render_markdown(report: AuditReport, template_path=REPORT_TEMPLATE) -> str:
    template = Path(template_path).read_text(encoding="utf-8")

    summary = tabulate(
        [[r.category.value, r.title, r.compliance.value,
          _num(r.metrics[0].value) if r.metrics else "",
          r.rating.rating.value if r.rating else ""]
         for r in report.results],
        headers=["Category", "Item", "Compliance", "Primary metric", "Rating"],
        tablefmt="github", disable_numparse=True,
    )

    sections: list[str] = []
    for category, results in report.by_category():
        if not results:
            continue
        sections += [f"## {category.value}", ""]
        for result in results:
            sections += _render_item(result)

    warnings = "\n".join(_bullets("Report warnings", report.warnings))
    return template.format(
        data_center_id=report.data_center_id,
        mode=report.mode.value,
        window_start=format_timestamp(report.window[0]),
        window_end=format_timestamp(report.window[1]),
        ashrae_class=int(report.ashrae_class),
        tables_version=report.tables_version,
        rti_tolerance_pct=f"{report.rti_tolerance_pct:g}",
        generated_at=format_timestamp(report.generated_at),
        tool_version=report.tool_version,
        summary_table=summary,
        report_warnings=warnings,
        sections="\n".join(sections).rstrip() + "\n",
    )


def render(report: AuditReport, fmt: ReportFormat = ReportFormat.JSON) -> str:
    if ReportFormat(fmt) is ReportFormat.MARKDOWN:
        return render_markdown(report)
    return render_json(report)


def write_document(text: str, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    logger.info(f"📄 Wrote {path}")
    return path


# ── Time series export ───────────────────────────────────────
def export_timeseries(report: AuditReport, telemetry: Telemetry,
                      inventory: Optional[Inventory] = None) -> str:
    """
    CSV `timestamp,series,value,unit` for external plotting.

    Ambient readings inside the report window (one row each, series
    `ambient_temperature:<sensor>`) plus one row per computed global metric,
    stamped at the window end. Without an inventory every temperature series
    counts as ambient.
    """
    start, end = report.window
    if inventory is not None:
        ambient_ids = [sid for room in inventory.rooms for sid in room.ambient_sensor_ids]
    else:
        ambient_ids = sorted(sid for sid, s in telemetry.items()
                             if s.kind is SensorKind.TEMPERATURE_F)

    rows = []
    for sid in dict.fromkeys(ambient_ids):
        series = telemetry.get(sid)
        if series is None:
            continue
        rows += [(ts, f"ambient_temperature:{sid}", repr(float(v)), series.unit)
                 for ts, v in series.points if start <= ts <= end]

    for item_id in GLOBAL_ITEMS:
        try:
            result = report.result(item_id)
        except KeyError:
            continue
        metric = result.primary_metric()
        if metric is not None:
            rows.append((end, item_id, repr(metric.value), metric.unit))

    rows.sort(key=lambda row: (row[0], row[1]))
    frame = pd.DataFrame([(format_timestamp(ts), *rest) for ts, *rest in rows],
                         columns=TIMESERIES_COLUMNS)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


# ── Diff ─────────────────────────────────────────────────────
class ChangeDirection(str, Enum):
    IMPROVED = "Improved"
    REGRESSED = "Regressed"
    UNCHANGED = "Unchanged"
    NOT_COMPARABLE = "NotComparable"


class ItemDelta(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    metric_id: Optional[MetricId] = None
    old_value: Optional[float] = None
    new_value: Optional[float] = None
    old_rating: Optional[Rating] = None
    new_rating: Optional[Rating] = None
    old_compliance: Compliance
    new_compliance: Compliance
    direction: ChangeDirection


class ReportDiff(BaseModel):
    model_config = ConfigDict(frozen=True)

    data_center_id: str
    mode: str
    baseline_id: str
    current_id: str
    deltas: list[ItemDelta]
    only_in_baseline: list[str] = []
    only_in_current: list[str] = []


def compare_values(metric_id: MetricId, old: float, new: float) -> ChangeDirection:
    if new == old:
        return ChangeDirection.UNCHANGED
    direction = better_direction(metric_id)
    if direction is Direction.LOWER:
        better = new < old
    elif direction is Direction.HIGHER:
        better = new > old
    else:
        old_gap, new_gap = abs(old - 100.0), abs(new - 100.0)
        if old_gap == new_gap:
            return ChangeDirection.UNCHANGED
        better = new_gap < old_gap
    return ChangeDirection.IMPROVED if better else ChangeDirection.REGRESSED


def _report_id(report: AuditReport) -> str:
    return f"{report.data_center_id}@{format_timestamp(report.generated_at)}"


def diff(baseline: AuditReport, current: AuditReport) -> ReportDiff:
    """Compare the primary metric of every item both reports share."""
    if baseline.data_center_id != current.data_center_id:
        raise MismatchedReports(
            f"reports cover different data centers: '{baseline.data_center_id}' "
            f"vs '{current.data_center_id}'"
        )
    if baseline.mode is not current.mode:
        raise MismatchedReports(
            f"reports use different audit types: {baseline.mode.value} vs {current.mode.value}"
        )

    old_by_id = {r.item_id: r for r in baseline.results}
    new_by_id = {r.item_id: r for r in current.results}
    deltas = []
    for item_id, old in old_by_id.items():
        new = new_by_id.get(item_id)
        if new is None:
            continue
        old_m, new_m = old.primary_metric(), new.primary_metric()
        comparable = old_m is not None and new_m is not None and old_m.metric_id == new_m.metric_id
        deltas.append(ItemDelta(
            item_id=item_id,
            metric_id=(old_m or new_m).metric_id if (old_m or new_m) else None,
            old_value=old_m.value if old_m else None,
            new_value=new_m.value if new_m else None,
            old_rating=old.rating.rating if old.rating else None,
            new_rating=new.rating.rating if new.rating else None,
            old_compliance=old.compliance,
            new_compliance=new.compliance,
            direction=(compare_values(old_m.metric_id, old_m.value, new_m.value)
                       if comparable else ChangeDirection.NOT_COMPARABLE),
        ))

    return ReportDiff(
        data_center_id=baseline.data_center_id, mode=baseline.mode.value,
        baseline_id=_report_id(baseline), current_id=_report_id(current), deltas=deltas,
        only_in_baseline=[i for i in old_by_id if i not in new_by_id],
        only_in_current=[i for i in new_by_id if i not in old_by_id],
    )


def render_diff(report_diff: ReportDiff, fmt: ReportFormat = ReportFormat.JSON) -> str:
    if ReportFormat(fmt) is ReportFormat.JSON:
        return report_diff.model_dump_json(indent=2) + "\n"

    def cell(value: Optional[float]) -> str:
        return "" if value is None else _num(value)

    rows = [[d.item_id, d.metric_id.value if d.metric_id else "", cell(d.old_value),
             cell(d.new_value),
             f"{d.old_rating.value if d.old_rating else '-'} → "
             f"{d.new_rating.value if d.new_rating else '-'}",
             d.direction.value]
            for d in report_diff.deltas]
    lines = [
        f"# Audit comparison: {report_diff.data_center_id} ({report_diff.mode})", "",
        f"Baseline: `{report_diff.baseline_id}`  ",
        f"Current: `{report_diff.current_id}`", "",
        tabulate(rows, headers=["Item", "Metric", "Baseline", "Current", "Rating", "Change"],
                 tablefmt="github", disable_numparse=True),
        "",
    ]
    lines += _bullets("Only in baseline", report_diff.only_in_baseline)
    lines += _bullets("Only in current", report_diff.only_in_current)
    return "\n".join(lines).rstrip() + "\n"


def summarize(report_diff: ReportDiff) -> dict[ChangeDirection, int]:
    return {d: sum(x.direction is d for x in report_diff.deltas) for d in ChangeDirection}
