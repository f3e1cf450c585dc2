"""
Centralized Configuration: all tunable defaults for the data-center energy audit.

Every value can be overridden from a .env file or the environment; none is required.
CLI flags take precedence over anything set here.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# ── Paths ────────────────────────────────────────────────────
BASE_DIR = Path(__file__).parent
TEMPLATES_DIR = BASE_DIR / "templates"

REPORT_TEMPLATE = TEMPLATES_DIR / "report_template.md"

TOOL_VERSION = "1.0.0"

# ── Logging ──────────────────────────────────────────────────
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
LOG_DATEFMT = "%H:%M:%S"

# ── Audit Settings ───────────────────────────────────────────
AUDIT_ASHRAE_CLASS = int(os.getenv("AUDIT_ASHRAE_CLASS", "1"))          # 1 or 2
AUDIT_UTILIZATION_AGGREGATION = os.getenv("AUDIT_UTILIZATION_AGGREGATION", "mean")
AUDIT_EQUIP_EFF_THRESHOLD = float(os.getenv("AUDIT_EQUIP_EFF_THRESHOLD", "16.876"))  # GFLOP/W
AUDIT_RTI_TOLERANCE_PCT = float(os.getenv("AUDIT_RTI_TOLERANCE_PCT", "5.0"))
AUDIT_WORKERS = int(os.getenv("AUDIT_WORKERS", "4"))
AUDIT_THRESHOLDS_FILE = os.getenv("AUDIT_THRESHOLDS_FILE", "") or None

# HVACSE needs a year of data unless annual energy readings are supplied
HVACSE_MIN_WINDOW_DAYS = 360

# ── Training Energy Estimator ────────────────────────────────
ESTIMATOR_GFLOP_PER_WATT = float(os.getenv("ESTIMATOR_GFLOP_PER_WATT", "16.876"))
ESTIMATOR_HOME_KWH_PER_MONTH = float(os.getenv("ESTIMATOR_HOME_KWH_PER_MONTH", "900"))

# ── Fixture Simulator ────────────────────────────────────────
FIXTURE_PRNG = "numpy.random.PCG64"
FIXTURE_INVENTORY_FILE = "inventory.json"
FIXTURE_TELEMETRY_FILE = "telemetry.csv"
