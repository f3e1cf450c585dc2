"""Audit registry and per-item evaluation."""

from datetime import timedelta
from fractions import Fraction

import pytest

from conftest import T0, hourly
from modules.audit_engine import (
    AuditConfig,
    AuditMode,
    Compliance,
    eval_alternating_aisles,
    run_audit,
)
from modules.audit_registry import CATEGORY_ORDER, ITEMS_BY_ID, REGISTRY, Tier, items_for_mode
from modules.benchmarks import Rating
from modules.errors import InvalidWindow
from modules.inventory import Aisle, Inventory, ThermalRole, validate_inventory
from modules.metrics import MetricId
from modules.telemetry import SensorKind

FULL_ONLY = {"RTI", "ALT_AISLES", "RCI", "CPU_UTIL"}


def _audit(inventory, telemetry, mode=AuditMode.FULL, **kwargs):
    return run_audit(inventory, telemetry, AuditConfig(mode=mode, **kwargs))


def _inventory(doc: dict) -> Inventory:
    return validate_inventory(Inventory.model_validate(doc))


def _row(*roles: ThermalRole) -> list[Aisle]:
    """Aisles a0..an-1 in a row, each neighboring the next."""
    ids = [f"a{i}" for i in range(len(roles))]
    return [
        Aisle(id=ids[i], thermal_role=role,
              neighbor_ids=[ids[j] for j in (i - 1, i + 1) if 0 <= j < len(ids)])
        for i, role in enumerate(roles)
    ]


H, C, U = ThermalRole.HOT, ThermalRole.COLD, ThermalRole.UNASSIGNED


class TestRegistry:
    def test_item_counts(self):
        assert len(REGISTRY) == 20
        assert len(items_for_mode(Tier.LITE)) == 16
        assert {i.item_id for i in REGISTRY if i.tier is Tier.FULL} == FULL_ONLY

    def test_lite_is_a_subset_of_full(self):
        lite = {i.item_id for i in items_for_mode(Tier.LITE)}
        full = {i.item_id for i in items_for_mode(Tier.FULL)}
        assert lite < full
        assert full - lite == FULL_ONLY

    def test_registry_is_in_category_order(self):
        positions = [CATEGORY_ORDER.index(i.category) for i in REGISTRY]
        assert positions == sorted(positions)

    def test_every_item_has_goal_and_actions(self):
        for item in REGISTRY:
            assert item.goal
            assert item.actions


class TestAlternation:
    def test_alternating_row_passes(self):
        result = eval_alternating_aisles(_row(H, C, H, C))
        assert result.metrics[0].value == 1.0
        assert result.compliance is Compliance.PASS

    def test_paired_roles_fail_everywhere(self):
        result = eval_alternating_aisles(_row(H, H, C, C))
        assert result.metrics[0].value == 0.0
        assert result.compliance is Compliance.FAIL
        assert result.flagged == ["a0", "a1", "a2", "a3"]

    def test_single_aisle_is_vacuous(self):
        result = eval_alternating_aisles(_row(C))
        assert result.metrics[0].value == 1.0
        assert result.compliance is Compliance.PASS
        assert "vacuously" in result.warnings[0]

    def test_unassigned_aisle_is_non_compliant(self):
        result = eval_alternating_aisles(_row(H, U, H))
        assert "a1" in result.flagged
        assert result.compliance is Compliance.FAIL

    def test_no_aisles(self):
        result = eval_alternating_aisles([])
        assert result.compliance is Compliance.NOT_APPLICABLE
        assert result.warnings


class TestSmallDataCenter:
    @pytest.fixture
    def report(self, inventory, telemetry):
        return _audit(inventory, telemetry)

    def test_full_report_holds_every_item(self, report):
        assert [r.item_id for r in report.results] == [i.item_id for i in REGISTRY]
        assert report.warnings == []

    def test_fraction_items(self, report):
        assert report.result("ALT_AISLES").compliance is Compliance.PASS
        assert report.result("CABLING").metrics[0].value == 0.5
        assert report.result("MERV").flagged == ["f2"]
        assert report.result("DIMMING").metrics[0].value == 0.5
        assert report.result("POWER_SOURCES").metrics[0].value == 0.25
        assert report.result("POWER_SOURCES").flagged == ["grid"]

    def test_barrier_savings(self, report):
        r = report.result("BARRIERS")
        assert r.compliance is Compliance.FAIL
        assert r.flagged == ["a2"]
        assert (r.savings.low, r.savings.high) == (Fraction(1, 5), Fraction(1, 4))

    def test_led_savings_cover_incandescent_watts(self, report):
        r = report.result("LED")
        assert r.compliance is Compliance.FAIL
        assert r.savings.low == Fraction(45)

    def test_ambient(self, report):
        r = report.result("AMBIENT_TEMP")
        assert r.metrics[0].value == pytest.approx(23 / 24)
        assert r.metrics[1].value == 1.0
        assert r.compliance is Compliance.FAIL
        assert r.flagged == ["amb-1"]
        # the failing reading is too hot, so raising the setpoint is not advised
        assert r.savings is None
        assert not any("Raise" in a for a in r.actions)
        assert any("85.0°F exceeds" in note for note in r.notes)

    def test_thermal_indices(self, report):
        rti = report.result("RTI")
        assert rti.metrics[0].value == pytest.approx(100.0)
        assert rti.compliance is Compliance.PASS
        rci = report.result("RCI")
        assert rci.metrics[0].value == 1.0
        assert {m.metric_id for m in rci.metrics[1:]} == {MetricId.RCI_HI, MetricId.RCI_LO}

    def test_pue_and_dcie(self, report):
        pue = report.result("PUE")
        assert pue.metrics[0].value == pytest.approx(1.4)
        assert pue.rating.rating is Rating.GOOD
        assert pue.compliance is Compliance.PASS
        assert report.result("DCIE").metrics[0].value == pytest.approx(1 / 1.4)

    def test_ere_is_tracked_not_rated(self, report):
        r = report.result("ERE")
        assert r.compliance is Compliance.PARTIAL_NUMERIC
        assert r.rating.rating is Rating.NOT_RATED
        assert r.metrics[0].value == pytest.approx(1.4)
        assert "track over time" in r.goal_statement
        assert r.actions

    def test_hvacse_needs_a_year(self, report):
        r = report.result("HVACSE")
        assert r.compliance is Compliance.NOT_APPLICABLE
        assert any("360 days" in w for w in r.warnings)

    def test_fan_and_cooling_efficiency(self, report):
        assert report.result("AE").metrics[0].value == pytest.approx(0.5)
        assert report.result("AE").rating.rating is Rating.BETTER
        cse = report.result("CSE")
        assert cse.metrics[0].value == pytest.approx(0.8)
        assert cse.rating.rating is Rating.GOOD

    def test_it_equipment(self, report):
        unused = report.result("UNUSED_SERVERS")
        assert unused.metrics[0].value == pytest.approx(1 / 3)
        assert unused.flagged == ["s3"]
        cpu = report.result("CPU_UTIL")
        assert cpu.compliance is Compliance.PASS
        assert any("s3" in w for w in cpu.warnings)
        eff = report.result("EQUIP_EFF")
        assert eff.metrics[0].value == 0.5
        assert eff.flagged == ["s2"]
        assert eff.compliance is Compliance.FAIL

    def test_actions_only_when_needed(self, report):
        for r in report.results:
            if r.compliance in (Compliance.FAIL, Compliance.PARTIAL_NUMERIC):
                assert r.actions
            else:
                assert r.actions == []


class TestVariations:
    def test_cabling_three_of_four(self, inventory_doc, telemetry):
        racks = inventory_doc["rooms"][0]["aisles"][0]["racks"]
        racks += [{"id": "r3", "cabling": "structured"}, {"id": "r4", "cabling": "structured"}]
        report = _audit(_inventory(inventory_doc), telemetry, AuditMode.LITE)
        r = report.result("CABLING")
        assert r.metrics[0].value == 0.75
        assert r.compliance is Compliance.FAIL

    def test_unknown_cabling_warns(self, inventory_doc, telemetry):
        del inventory_doc["rooms"][0]["aisles"][1]["racks"][0]["cabling"]
        r = _audit(_inventory(inventory_doc), telemetry).result("CABLING")
        assert r.flagged == ["r2"]
        assert "unknown" in r.warnings[0]

    def test_all_led_passes(self, inventory_doc, telemetry):
        inventory_doc["rooms"][0]["lamps"][1]["bulb"] = "led"
        r = _audit(_inventory(inventory_doc), telemetry).result("LED")
        assert r.compliance is Compliance.PASS
        assert r.savings is None

    def test_two_unused_of_ten(self, inventory_doc, telemetry):
        rack = inventory_doc["rooms"][0]["aisles"][0]["racks"][0]
        rack["servers"] = [{"id": f"s{i}", "in_use": i >= 2} for i in range(10)]
        inventory_doc["rooms"][0]["aisles"][1]["racks"][0]["servers"] = []
        r = _audit(_inventory(inventory_doc), telemetry).result("UNUSED_SERVERS")
        assert r.metrics[0].value == 0.2
        assert r.flagged == ["s0", "s1"]

    def test_low_rti_is_bypass(self, inventory, telemetry):
        telemetry["ret-1"] = hourly("ret-1", SensorKind.TEMPERATURE_F, [70.0] * 24)
        r = _audit(inventory, telemetry).result("RTI")
        assert r.metrics[0].value == pytest.approx(50.0)
        assert r.metrics[0].label == "bypass"
        assert r.compliance is Compliance.FAIL
        assert any("bypass" in note for note in r.notes)

    def test_rti_tolerance_widens_the_pass_band(self, inventory, telemetry):
        telemetry["ret-1"] = hourly("ret-1", SensorKind.TEMPERATURE_F, [81.0] * 24)
        assert _audit(inventory, telemetry).result("RTI").compliance is Compliance.PASS
        strict = _audit(inventory, telemetry, rti_tolerance_pct=0.0).result("RTI")
        assert strict.compliance is Compliance.FAIL

    def test_under_utilized_server(self, inventory, telemetry):
        telemetry["cpu-s1"] = hourly("cpu-s1", SensorKind.CPU_UTILIZATION_PCT, [30.0] * 24)
        r = _audit(inventory, telemetry).result("CPU_UTIL")
        assert r.compliance is Compliance.FAIL
        assert r.flagged == ["s1"]
        assert "Consolidate under-utilized servers." in r.actions

    def test_half_percent_above_fifty_is_correct(self, inventory, telemetry):
        telemetry["cpu-s1"] = hourly("cpu-s1", SensorKind.CPU_UTILIZATION_PCT, [50.5] * 24)
        r = _audit(inventory, telemetry).result("CPU_UTIL")
        assert r.compliance is Compliance.PASS
        assert "Correct > 50% and <= 85%" in r.notes[0]

    def test_cpu_util_max_aggregation(self, inventory, telemetry):
        telemetry["cpu-s2"] = hourly("cpu-s2", SensorKind.CPU_UTILIZATION_PCT,
                                     [60.0] * 23 + [95.0])
        mean = _audit(inventory, telemetry).result("CPU_UTIL")
        peak = _audit(inventory, telemetry, utilization_aggregation="max").result("CPU_UTIL")
        assert mean.compliance is Compliance.PASS
        assert peak.flagged == ["s2"]

    def test_equipment_threshold_is_configurable(self, inventory, telemetry):
        r = _audit(inventory, telemetry, equip_eff_threshold_gflop_per_w=10.0).result("EQUIP_EFF")
        assert r.compliance is Compliance.PASS

    def test_server_without_gflops_is_not_scored(self, inventory_doc, telemetry):
        s3 = inventory_doc["rooms"][0]["aisles"][1]["racks"][0]["servers"][0]
        s3.update(in_use=True, measured_power_w=300)
        r = _audit(_inventory(inventory_doc), telemetry).result("EQUIP_EFF")
        assert r.metrics[0].value == 0.5
        assert r.flagged == ["s2"]
        assert any("'s3' has no rated GFLOPS" in w for w in r.warnings)

    def test_unused_servers_are_not_scored(self, inventory_doc, telemetry):
        for rack in (inventory_doc["rooms"][0]["aisles"][0]["racks"][0],
                     inventory_doc["rooms"][0]["aisles"][1]["racks"][0]):
            for server in rack["servers"]:
                server["in_use"] = False
        r = _audit(_inventory(inventory_doc), telemetry).result("EQUIP_EFF")
        assert r.compliance is Compliance.NOT_APPLICABLE
        assert any("'s1' is not in use" in w for w in r.warnings)

    def test_no_fans_makes_ae_not_applicable(self, inventory_doc, telemetry):
        inventory_doc["rooms"][0]["fans"] = []
        r = _audit(_inventory(inventory_doc), telemetry).result("AE")
        assert r.compliance is Compliance.NOT_APPLICABLE
        assert r.warnings

    def test_missing_sensor_series(self, inventory, telemetry):
        del telemetry["fac-kw"]
        report = _audit(inventory, telemetry)
        assert report.result("PUE").compliance is Compliance.NOT_APPLICABLE
        assert any("fac-kw" in w for w in report.warnings)

    def test_annual_meters_enable_hvacse(self, inventory_doc, telemetry):
        inventory_doc["meters"]["it_energy_annual"] = ["it-annual"]
        inventory_doc["meters"]["hvac_energy_annual"] = ["hvac-annual"]
        telemetry["it-annual"] = hourly("it-annual", SensorKind.ENERGY_KWH_ANNUAL, [1.4e6] * 2)
        telemetry["hvac-annual"] = hourly("hvac-annual", SensorKind.ENERGY_KWH_ANNUAL, [1e6] * 2)
        r = _audit(_inventory(inventory_doc), telemetry).result("HVACSE")
        assert r.metrics[0].value == pytest.approx(1.4)
        assert r.rating.rating is Rating.GOOD

    def test_class2_widens_allowable(self, inventory, telemetry):
        telemetry["amb-1"] = hourly("amb-1", SensorKind.TEMPERATURE_F, [72.0] * 23 + [92.0])
        class1 = _audit(inventory, telemetry).result("AMBIENT_TEMP")
        class2 = _audit(inventory, telemetry, ashrae_class=2).result("AMBIENT_TEMP")
        assert class1.metrics[1].value == pytest.approx(23 / 24)
        assert class2.metrics[1].value == 1.0

    def test_cold_room_gets_setpoint_savings(self, inventory, telemetry):
        telemetry["amb-1"] = hourly("amb-1", SensorKind.TEMPERATURE_F, [72.0] * 23 + [60.0])
        r = _audit(inventory, telemetry).result("AMBIENT_TEMP")
        assert r.compliance is Compliance.FAIL
        # headroom runs from the hottest reading (72°F) to the 80.6°F limit
        assert (r.savings.low, r.savings.high) == (Fraction(43, 125), Fraction(43, 100))
        assert any("Raise" in a for a in r.actions)

    def test_negative_it_meter_does_not_abort(self, inventory, telemetry):
        telemetry["it-kw"] = hourly("it-kw", SensorKind.POWER_KW, [-100.0] * 24)
        report = _audit(inventory, telemetry)
        for item_id in ("PUE", "DCIE", "ERE"):
            r = report.result(item_id)
            assert r.compliance is Compliance.NOT_APPLICABLE
            assert any("non-negative" in w for w in r.warnings)
        assert report.result("CABLING").metrics[0].value == 0.5

    def test_overflowing_ratio_is_not_applicable(self, inventory, telemetry):
        telemetry["fan1-cfm"] = hourly("fan1-cfm", SensorKind.AIRFLOW_CFM, [1e-320] * 24)
        r = _audit(inventory, telemetry).result("AE")
        assert r.compliance is Compliance.NOT_APPLICABLE
        assert any("overflows" in w for w in r.warnings)

    def test_window_restricts_readings(self, inventory, telemetry):
        config_window = (T0, T0 + timedelta(hours=22))
        r = _audit(inventory, telemetry, window=config_window).result("AMBIENT_TEMP")
        assert r.compliance is Compliance.PASS

    def test_reversed_window(self, inventory, telemetry):
        with pytest.raises(InvalidWindow):
            _audit(inventory, telemetry, window=(T0 + timedelta(hours=1), T0))

    def test_no_telemetry_at_all(self, inventory):
        report = _audit(inventory, {}, AuditMode.LITE)
        assert len(report.results) == 16
        assert report.result("PUE").compliance is Compliance.NOT_APPLICABLE
        assert report.result("CABLING").compliance is Compliance.FAIL


class TestGeneratedFixture:
    def test_tier_sizes(self, fixture_data):
        inventory, telemetry = fixture_data
        assert len(_audit(inventory, telemetry, AuditMode.LITE).results) == 16
        assert len(_audit(inventory, telemetry, AuditMode.FULL).results) == 20

    def test_lite_results_match_full(self, fixture_data):
        inventory, telemetry = fixture_data
        lite = _audit(inventory, telemetry, AuditMode.LITE)
        full = _audit(inventory, telemetry, AuditMode.FULL)
        for r in lite.results:
            assert r == full.result(r.item_id)

    def test_deterministic_apart_from_timestamp(self, fixture_data):
        inventory, telemetry = fixture_data
        first = _audit(inventory, telemetry).model_dump(exclude={"generated_at"})
        second = _audit(inventory, telemetry).model_dump(exclude={"generated_at"})
        assert first == second

    def test_worker_count_does_not_change_results(self, fixture_data):
        inventory, telemetry = fixture_data
        serial = _audit(inventory, telemetry, workers=1)
        pooled = _audit(inventory, telemetry, workers=4)
        assert serial.results == pooled.results

    def test_generated_pue_is_rated(self, fixture_data):
        inventory, telemetry = fixture_data
        r = _audit(inventory, telemetry).result("PUE")
        assert r.metrics[0].value == pytest.approx(1.4, abs=1e-9)
        assert r.rating.rating is Rating.GOOD

    def test_registry_titles_carry_into_results(self, fixture_data):
        inventory, telemetry = fixture_data
        for r in _audit(inventory, telemetry).results:
            assert r.title == ITEMS_BY_ID[r.item_id].title
