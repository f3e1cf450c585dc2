"""
Audit item registry: the 20 items of the full/lite framework.

Order follows the all-items table: grouped by category in report order.
Goal and action strings are kept word for word so a report can be traced back
to the framework it implements.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict


class Category(str, Enum):
    COOLING_AIR = "Cooling Air and Air Management"
    ENVIRONMENTAL = "Environmental Conditions"
    GLOBAL = "Global"
    IT_EQUIPMENT = "IT Equipment"
    POWER_DISTRIBUTION = "IT Power Distribution Chain"
    LIGHTING = "Lighting"


CATEGORY_ORDER = list(Category)


class Tier(str, Enum):
    FULL = "Full"
    LITE = "Lite"


class Level(str, Enum):
    RACK = "Rack"
    AISLE = "Aisle"
    FILTER = "Filter"
    SERVER = "Server"
    FAN = "Fan"
    HVAC_SYSTEM = "HvacSystem"
    ROOM = "Room"
    DATA_CENTER = "DataCenter"


class AuditItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    title: str
    category: Category
    tier: Tier
    level: Level
    goal: str
    actions: tuple[str, ...]
    alt_titles: tuple[str, ...] = ()


def _benchmark(item_id: str, title: str, level: Level, metric: str) -> AuditItem:
    return AuditItem(
        item_id=item_id, title=title, category=Category.GLOBAL, tier=Tier.LITE, level=level,
        goal=(f"Benchmark {metric} per data center; overall current state of data center "
              f"energy efficiency, per U.S. Department of Energy standards."),
        actions=(
            f"Once an organization has a benchmark understanding of its {metric}, it can use "
            f"the non-metric best practices to take actions to improve {metric} and track it "
            f"over time. This benchmark can also be used in cooperation with any existing "
            f"sustainability strategy from the organization, to drive goals for future "
            f"{metric} values.",
        ),
    )


REGISTRY: tuple[AuditItem, ...] = (
    # ── Cooling Air and Air Management ──
    AuditItem(
        item_id="RTI", title="Return Temperature Index", category=Category.COOLING_AIR,
        tier=Tier.FULL, level=Level.ROOM,
        goal=("Identify which rooms or data centers do not have sufficient airflow "
              "management (i.e., RTI != 100%)."),
        actions=("Adjust room air management to ensure optimal RTI (100%).",),
    ),
    AuditItem(
        item_id="ALT_AISLES", title="Alternating Hot and Cold Rack Aisles",
        category=Category.COOLING_AIR, tier=Tier.FULL, level=Level.AISLE,
        goal="Identify which rows do not follow the alternating hot and cold aisle scheme.",
        actions=("Re-organize server racks and HVAC system to ensure 100% compliance.",),
    ),
    AuditItem(
        item_id="BARRIERS", title="Physical Separation of Hot and Cold Air of Rack Aisles",
        category=Category.COOLING_AIR, tier=Tier.LITE, level=Level.AISLE,
        goal="Identify which aisles do not follow the physical barrier scheme.",
        actions=("With non-compliant aisles, install a barrier (e.g., strip curtain, rigid "
                 "enclosures, etc.) to ensure 100% compliance.",),
    ),
    AuditItem(
        item_id="CABLING", title="Structured Cabling for a Rack",
        category=Category.COOLING_AIR, tier=Tier.LITE, level=Level.RACK,
        goal="Identify which racks have unstructured cabling.",
        actions=("With non-compliant racks, re-wire to ensure structured cabling.",),
    ),
    AuditItem(
        item_id="MERV", title="Air Filter MERV Rating Compliance",
        category=Category.COOLING_AIR, tier=Tier.LITE, level=Level.FILTER,
        goal="Identify which air filters are not compliant.",
        actions=("With non-compliant air filters, replace with the appropriate MERV-rated "
                 "air filter.",),
    ),
    # ── Environmental Conditions ──
    AuditItem(
        item_id="AMBIENT_TEMP", title="Data Center Ambient Temperature",
        category=Category.ENVIRONMENTAL, tier=Tier.LITE, level=Level.DATA_CENTER,
        goal=("Determine if data center follows ASHRAE guidelines for data center "
              "temperature ranges."),
        actions=("Raise the data center's ambient temperature to not only be within the "
                 "acceptable ASHRAE suggested temperature range, but strive to be near the "
                 "high temperature limit.",),
    ),
    AuditItem(
        item_id="RCI", title="Rack Cooling Index", category=Category.ENVIRONMENTAL,
        tier=Tier.FULL, level=Level.RACK,
        goal=("Identify which rooms or data centers do not have sufficient temperature "
              "management (i.e., RCI_HI or RCI_LO != 100%)."),
        actions=("Adjust rack temperature management to ensure optimal RCI_HI and RCI_LO "
                 "(100%).",),
    ),
    # ── Global ──
    _benchmark("PUE", "Power Usage Effectiveness", Level.DATA_CENTER, "PUE"),
    _benchmark("DCIE", "Data Center Infrastructure Efficiency", Level.DATA_CENTER, "DCIE"),
    AuditItem(
        item_id="ERE", title="Energy Reuse Effectiveness", category=Category.GLOBAL,
        tier=Tier.LITE, level=Level.DATA_CENTER,
        goal=("Benchmark ERE per data center; overall current state of data center energy "
              "efficiency. No DOE score exists for ERE: capture it at an organization-defined "
              "cadence to track over time."),
        actions=_benchmark("ERE", "", Level.DATA_CENTER, "ERE").actions,
    ),
    _benchmark("HVACSE", "HVAC System Effectiveness", Level.DATA_CENTER, "HVACSE"),
    _benchmark("AE", "Airflow Efficiency", Level.FAN, "AE"),
    _benchmark("CSE", "Cooling System Efficiency", Level.HVAC_SYSTEM, "CSE"),
    # ── IT Equipment ──
    AuditItem(
        item_id="UNUSED_SERVERS", title="Identify Unused Operational Servers",
        category=Category.IT_EQUIPMENT, tier=Tier.LITE, level=Level.DATA_CENTER,
        goal=("Identify which operational servers are not in use and consider them "
              "candidates for retirement."),
        actions=("Determine which unused operational servers to retire, to ensure all "
                 "servers that are drawing energy are in use.",),
    ),
    AuditItem(
        item_id="CPU_UTIL", title="Monitor Server CPU Utilization",
        category=Category.IT_EQUIPMENT, tier=Tier.FULL, level=Level.SERVER,
        goal="Identify which operational servers are under-utilized or over-utilized.",
        actions=(
            "Optimize server performance to avoid under-utilization (poor energy management) "
            "and over-utilization (wear and tear).",
            "Consolidate under-utilized servers.",
        ),
    ),
    AuditItem(
        item_id="EQUIP_EFF", title="Equipment Efficiency", category=Category.IT_EQUIPMENT,
        tier=Tier.LITE, level=Level.SERVER,
        goal="Identify which equipment have a low value of GFLOP/W.",
        actions=("Procure energy efficient servers to replace inefficient equipment.",),
    ),
    # ── IT Power Distribution Chain ──
    AuditItem(
        item_id="POWER_SOURCES", title="Identify Power Sources",
        alt_titles=("Trace Data Center Power Generation Sources",),
        category=Category.POWER_DISTRIBUTION, tier=Tier.LITE, level=Level.DATA_CENTER,
        goal="Identify how electrical power is generated for the data center.",
        actions=("Work with the organization's facilities group to create a strategy to phase "
                 "out non-renewable sources of power in favor of renewable sources. "
                 "The goal is 100%.",),
    ),
    # ── Lighting ──
    AuditItem(
        item_id="LED", title="LED Bulbs", category=Category.LIGHTING, tier=Tier.LITE,
        level=Level.DATA_CENTER,
        goal="Identify which lamps do not contain LED bulbs.",
        actions=("Replace all non-LED bulbs with LED. The goal is 100%.",),
    ),
    AuditItem(
        item_id="DIMMING", title="Lighting Control and Dimming", category=Category.LIGHTING,
        tier=Tier.LITE, level=Level.DATA_CENTER,
        goal="Identify which lamps do not offer dimming.",
        actions=("Install dimming controls on all non-dimming lamps and lights. "
                 "The goal is 100%.",),
    ),
    AuditItem(
        item_id="OCCUPANCY", title="Occupancy Sensors to Control Lights",
        category=Category.LIGHTING, tier=Tier.LITE, level=Level.DATA_CENTER,
        goal="Identify which lamps do not offer control via occupancy sensors.",
        actions=("Install occupancy sensors on all non-equipped lamps and lights. "
                 "The goal is 100%.",),
    ),
)

ITEMS_BY_ID = {item.item_id: item for item in REGISTRY}


def items_for_mode(mode: Tier) -> list[AuditItem]:
    """Lite: the lite items only. Full: every item (lite + full)."""
    mode = Tier(mode)
    if mode is Tier.LITE:
        return [item for item in REGISTRY if item.tier is Tier.LITE]
    return list(REGISTRY)
