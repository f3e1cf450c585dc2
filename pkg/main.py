"""
🏢 Data Center Energy Audit: Command-line entry point
======================================================
Loads inventories and telemetry, runs full/lite audits, estimates training
energy, diffs reports and generates synthetic fixtures.

Usage:
    python main.py audit --inventory inv.json --telemetry tel.csv --mode lite
    python main.py estimate --gflop 1.64e11
    python main.py table1 --format csv --out table1.csv
    python main.py diff --baseline q1.json --current q2.json --format md
    python main.py simulate --seed 7 --out-dir fixtures/ --rate LED=0.5
    python main.py validate --inventory inv.json --telemetry tel.csv

Exit codes: 0 success, 1 invalid input (parse/validation), 2 usage error.
Diagnostics go to stderr; reports and numbers go to stdout or --out.
"""

import argparse
import logging
import os
import sys
import traceback
from datetime import datetime, timezone
from typing import Optional

import pydantic

from config import LOG_DATEFMT, LOG_FORMAT, LOG_LEVEL, TOOL_VERSION

logger = logging.getLogger("audit")


# ── Logging ──────────────────────────────────────────────────
class ColourFormatter(logging.Formatter):
    COLOURS = {
        "DEBUG": "\033[36m",
        "INFO": "\033[32m",
        "WARNING": "\033[33m",
        "ERROR": "\033[31m",
        "CRITICAL": "\033[1;31m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        colour = self.COLOURS.get(record.levelname)
        if not colour:
            return text
        return text.replace(f"[{record.levelname}]",
                            f"[{colour}{record.levelname}{self.RESET}]", 1)


def setup_logging(level: str = LOG_LEVEL) -> None:
    handler = logging.StreamHandler(sys.stderr)
    use_colour = sys.stderr.isatty() and "NO_COLOR" not in os.environ
    formatter_cls = ColourFormatter if use_colour else logging.Formatter
    handler.setFormatter(formatter_cls(LOG_FORMAT, datefmt=LOG_DATEFMT))
    logging.basicConfig(level=level, handlers=[handler], force=True)


# ── Argument types ───────────────────────────────────────────
def instant(text: str) -> datetime:
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an RFC 3339 instant: '{text}'")
    if ts.tzinfo is None:
        raise argparse.ArgumentTypeError(f"instant needs a UTC offset or 'Z': '{text}'")
    return ts.astimezone(timezone.utc)


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: '{text}'")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: '{text}'")
    return value


def non_negative_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: '{text}'")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: '{text}'")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: '{text}'")
    return value


def rate_pair(text: str) -> tuple[str, float]:
    item, sep, fraction = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected ITEM=FRACTION, got '{text}'")
    try:
        return item.strip().upper(), float(fraction)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fraction for {item} is not a number: '{fraction}'")


# ── Subcommands ──────────────────────────────────────────────
def _emit(text: str, out: Optional[str]) -> None:
    from modules.reporting import write_document
    if out:
        write_document(text, out)
    else:
        sys.stdout.write(text)


def cmd_audit(args) -> int:
    from modules.audit_engine import AuditConfig, AuditMode, run_audit
    from modules.inventory import load_inventory
    from modules.reporting import export_timeseries, render, write_document
    from modules.telemetry import load_telemetry

    inventory = load_inventory(args.inventory)
    telemetry = load_telemetry(args.telemetry) if args.telemetry else {}

    overrides = {
        "window": tuple(args.window) if args.window else None,
        "ashrae_class": args.ashrae_class,
        "utilization_aggregation": args.utilization_aggregation,
        "equip_eff_threshold_gflop_per_w": args.equip_eff_threshold,
        "thresholds_override_path": args.thresholds,
        "rti_tolerance_pct": args.rti_tolerance,
        "workers": args.workers,
    }
    config = AuditConfig(mode=AuditMode(args.mode.capitalize()),
                         **{k: v for k, v in overrides.items() if v is not None})
    report = run_audit(inventory, telemetry, config)

    _emit(render(report, args.format), args.out)
    if args.timeseries_out:
        write_document(export_timeseries(report, telemetry, inventory), args.timeseries_out)
    return 0


def cmd_estimate(args) -> int:
    from modules.training_energy import (
        EstimatorParams, TrainingWorkload, consumption_kwh, homes_powered,
    )

    params = EstimatorParams(**{k: v for k, v in {
        "gflop_per_watt": args.gflop_per_watt,
        "home_kwh_per_month": args.home_kwh_month,
    }.items() if v is not None})
    workload = TrainingWorkload(model_name=args.model_name, total_gflop=args.gflop)
    kwh = consumption_kwh(workload, params, strict_units=args.strict_units)
    homes = homes_powered(kwh, params)

    if args.strict_units:
        logger.info("Strict units: GFLOP/W read as GFLOP/s per watt; result is 1/3600 "
                    "of the published convention")
    print(f"{kwh:,.2f} kWh")
    print(f"{homes:,.2f} homes")
    return 0


def cmd_table1(args) -> int:
    from modules.training_energy import export_table1_csv, format_table1, table1

    rows = table1()
    fmt = args.format or ("csv" if args.out else "table")
    text = export_table1_csv(rows) if fmt == "csv" else format_table1(rows) + "\n"
    _emit(text, args.out)
    return 0


def cmd_diff(args) -> int:
    from modules.reporting import diff, load_report, render_diff, summarize

    result = diff(load_report(args.baseline), load_report(args.current))
    counts = summarize(result)
    logger.info("📊 " + ", ".join(f"{n} {d.value}" for d, n in counts.items()))
    _emit(render_diff(result, args.format), args.out)
    return 0


def cmd_simulate(args) -> int:
    from modules.fixture_simulator import FixtureProfile, generate, write_fixture

    fields = {
        "rooms": args.rooms, "aisles": args.aisles, "racks": args.racks,
        "servers_per_rack": args.servers_per_rack, "lamps": args.lamps,
        "filters": args.filters, "target_pue": args.target_pue,
        "ambient_mean_f": args.ambient_mean, "ambient_jitter_f": args.ambient_jitter,
        "start": args.start, "step_minutes": args.step_minutes, "points": args.points,
        "aisle_layout": args.layout,
    }
    profile = FixtureProfile(
        seed=args.seed,
        compliance_rates=dict(args.rate or []),
        **{k: v for k, v in fields.items() if v is not None},
    )
    inventory, telemetry = generate(profile)
    inv_path, tel_path = write_fixture(inventory, telemetry, args.out_dir)
    print(inv_path)
    print(tel_path)
    return 0


def cmd_validate(args) -> int:
    from modules.inventory import load_inventory
    from modules.telemetry import load_telemetry, resolve_sensors

    inventory = load_inventory(args.inventory)
    print(f"inventory OK: {inventory.data_center_id} ({len(inventory.rooms)} rooms, "
          f"{len(inventory.racks())} racks, {len(inventory.servers())} servers)")
    if args.telemetry:
        telemetry = load_telemetry(args.telemetry)
        points = sum(len(s) for s in telemetry.values())
        print(f"telemetry OK: {len(telemetry)} series, {points} readings")
        for sid in resolve_sensors(inventory.sensor_ids(), telemetry):
            logger.warning(f"sensor '{sid}' referenced by inventory has no telemetry series")
    return 0


# ── Parser ───────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="🏢 Data center energy-efficiency audit (full / lite)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py audit --inventory inv.json --telemetry tel.csv --mode full --format md
  python main.py estimate --gflop 1.64e11
  python main.py simulate --seed 1 --out-dir fixtures --rate LED=0.5
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("audit", help="Run a full or lite audit")
    p.add_argument("--inventory", required=True, help="Inventory JSON")
    p.add_argument("--telemetry", help="Telemetry CSV")
    p.add_argument("--mode", required=True, choices=["full", "lite"], type=str.lower)
    p.add_argument("--window", nargs=2, type=instant, metavar=("START", "END"),
                   help="RFC 3339 instants; default: full telemetry span")
    p.add_argument("--ashrae-class", type=int, choices=[1, 2])
    p.add_argument("--format", choices=["json", "md"], default="json")
    p.add_argument("--out", help="Write the report here instead of stdout")
    p.add_argument("--thresholds", help="Benchmark thresholds override JSON")
    p.add_argument("--rti-tolerance", type=non_negative_float, help="Percentage points")
    p.add_argument("--utilization-aggregation", choices=["mean", "max"])
    p.add_argument("--equip-eff-threshold", type=positive_float, help="GFLOP/W")
    p.add_argument("--workers", type=positive_int, help="Item evaluation threads")
    p.add_argument("--timeseries-out", help="Also export ambient/metric series CSV here")
    p.set_defaults(handler=cmd_audit)

    p = sub.add_parser("estimate", help="Training compute to kWh and homes powered")
    p.add_argument("--gflop", required=True, type=positive_float, help="Total GFLOP, e.g. 1.64e11")
    p.add_argument("--gflop-per-watt", type=positive_float)
    p.add_argument("--home-kwh-month", type=positive_float)
    p.add_argument("--strict-units", action="store_true",
                   help="Read GFLOP/W as GFLOP/s per watt (3600x smaller)")
    p.add_argument("--model-name", default="workload")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("table1", help="Energy to train 17 reference NLP models")
    p.add_argument("--format", choices=["csv", "table"])
    p.add_argument("--out")
    p.set_defaults(handler=cmd_table1)

    p = sub.add_parser("diff", help="Compare two JSON reports")
    p.add_argument("--baseline", required=True)
    p.add_argument("--current", required=True)
    p.add_argument("--format", choices=["json", "md"], default="json")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_diff)

    p = sub.add_parser("simulate", help="Generate a synthetic fixture")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out-dir", required=True)
    for flag in ("--rooms", "--aisles", "--racks", "--servers-per-rack", "--lamps",
                 "--filters", "--points", "--step-minutes"):
        p.add_argument(flag, type=positive_int)
    p.add_argument("--target-pue", type=positive_float)
    p.add_argument("--ambient-mean", type=float, help="°F")
    p.add_argument("--ambient-jitter", type=non_negative_float, help="°F")
    p.add_argument("--start", type=instant)
    p.add_argument("--layout", choices=["row", "ring"])
    p.add_argument("--rate", type=rate_pair, action="append", metavar="ITEM=FRACTION",
                   help="Requested compliance rate, repeatable")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("validate", help="Load and validate input files")
    p.add_argument("--inventory", required=True)
    p.add_argument("--telemetry")
    p.set_defaults(handler=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse already printed usage; --help/--version exit 0
        return int(e.code or 0)

    setup_logging("DEBUG" if args.verbose else LOG_LEVEL)
    from modules.errors import AuditError

    try:
        return args.handler(args)
    except pydantic.ValidationError as e:
        logger.error(f"❌ Invalid option: {e.errors()[0]['msg']}")
        return 2
    except AuditError as e:
        logger.error(f"❌ {e}")
        logger.debug(traceback.format_exc())
        return 1


if __name__ == "__main__":
    sys.exit(main())
