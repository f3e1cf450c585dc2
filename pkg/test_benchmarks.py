"""DOE ratings, ASHRAE envelopes, MERV rules and threshold overrides."""

import json

import numpy as np
import pytest

from modules.benchmarks import (
    DEFAULT_TABLES,
    DOE_SCORES,
    AshraeClass,
    Direction,
    Rating,
    better_direction,
    check_filter,
    envelope_for,
    filter_warnings,
    load_thresholds,
    rate,
)
from modules.errors import ParseError, ValidationError
from modules.inventory import AirFilter, FilterPurpose
from modules.metrics import Band, MetricId, MetricValue, in_band


def _m(metric_id: MetricId, value: float) -> MetricValue:
    return MetricValue(metric_id=metric_id, value=value)


THRESHOLD_CASES = [
    (metric_id, value, rating)
    for metric_id, triple in DOE_SCORES.items()
    for value, rating in zip(triple, (Rating.STANDARD, Rating.GOOD, Rating.BETTER))
]


RATING_RANK = {Rating.BELOW_STANDARD: 0, Rating.STANDARD: 1, Rating.GOOD: 2, Rating.BETTER: 3}


class TestRate:
    @pytest.mark.parametrize("metric_id, value, expected", THRESHOLD_CASES)
    def test_exact_threshold_earns_its_rating(self, metric_id, value, expected):
        assert rate(_m(metric_id, value)).rating is expected

    @pytest.mark.parametrize("metric_id, value", [
        (MetricId.PUE, 2.01),
        (MetricId.DCIE, 0.49),
        (MetricId.HVACSE, 0.69),
        (MetricId.AE, 1.3),
        (MetricId.CSE, 1.2),
    ])
    def test_below_standard(self, metric_id, value):
        assert rate(_m(metric_id, value)).rating is Rating.BELOW_STANDARD

    def test_between_thresholds(self):
        assert rate(_m(MetricId.PUE, 1.7)).rating is Rating.STANDARD
        assert rate(_m(MetricId.PUE, 1.2)).rating is Rating.GOOD
        assert rate(_m(MetricId.DCIE, 0.95)).rating is Rating.BETTER

    def test_float_noise_at_a_threshold(self):
        assert rate(_m(MetricId.PUE, 1.4000000000000001)).rating is Rating.GOOD

    def test_unrated_metric(self):
        r = rate(_m(MetricId.ERE, 1.2))
        assert r.rating is Rating.NOT_RATED
        assert r.thresholds_used is None

    def test_only_doe_metrics_are_rated(self):
        rated = {m for m in MetricId if rate(_m(m, 1.0)).rating is not Rating.NOT_RATED}
        assert rated == {MetricId.PUE, MetricId.DCIE, MetricId.HVACSE, MetricId.AE, MetricId.CSE}

    @pytest.mark.parametrize("metric_id", sorted(DOE_SCORES, key=lambda m: m.value))
    def test_rating_is_monotone_in_the_better_direction(self, metric_id):
        """1000 seeded values: improving a metric never lowers its rating."""
        rng = np.random.default_rng(31)
        triple = DOE_SCORES[metric_id]
        values = np.sort(rng.uniform(min(triple) * 0.5, max(triple) * 1.5, size=1000))
        # include the thresholds themselves
        values = np.sort(np.concatenate([values, triple]))
        if better_direction(metric_id) is Direction.LOWER:
            values = values[::-1]
        ranks = [RATING_RANK[rate(_m(metric_id, float(v))).rating] for v in values]
        assert ranks == sorted(ranks)
        assert ranks[0] == 0 and ranks[-1] == 3

    def test_thresholds_are_reported(self):
        used = rate(_m(MetricId.CSE, 0.8)).thresholds_used
        assert (used.standard, used.good, used.better) == (1.1, 0.8, 0.6)
        assert used.direction.value == "lower_is_better"


class TestEnvelopes:
    def test_class1(self):
        env = envelope_for(1)
        assert (env.min_allow_f, env.min_rec_f, env.max_rec_f, env.max_allow_f) == (
            59.0, 64.4, 80.6, 89.6)

    def test_class2(self):
        env = envelope_for(AshraeClass.CLASS2)
        assert (env.min_allow_f, env.min_rec_f, env.max_rec_f, env.max_allow_f) == (
            50.0, 64.4, 80.6, 95.0)

    @pytest.mark.parametrize("cls", [1, 2])
    def test_recommended_limits_are_in_band(self, cls):
        env = envelope_for(cls)
        assert in_band(64.4, env, Band.RECOMMENDED)
        assert in_band(80.6, env, Band.RECOMMENDED)

    def test_unknown_class(self):
        with pytest.raises(ValueError):
            envelope_for(3)


class TestMerv:
    @pytest.mark.parametrize("purpose, merv, ok", [
        (FilterPurpose.EXTERNAL_INTAKE, 10, False),
        (FilterPurpose.EXTERNAL_INTAKE, 11, True),
        (FilterPurpose.EXTERNAL_INTAKE, 13, True),
        (FilterPurpose.EXTERNAL_INTAKE, 14, False),
        (FilterPurpose.INTERNAL_RECIRCULATION, 7, False),
        (FilterPurpose.INTERNAL_RECIRCULATION, 8, True),
        (FilterPurpose.INTERNAL_RECIRCULATION, 12, True),
    ])
    def test_rules(self, purpose, merv, ok):
        assert check_filter(AirFilter(id="f", merv_rating=merv, purpose=purpose)) is ok

    def test_over_filtered_intake_warns(self):
        f = AirFilter(id="f9", merv_rating=16, purpose=FilterPurpose.EXTERNAL_INTAKE)
        assert "f9" in filter_warnings(f)[0]
        ok = AirFilter(id="f1", merv_rating=12, purpose=FilterPurpose.EXTERNAL_INTAKE)
        assert filter_warnings(ok) == []


class TestOverrides:
    def _write(self, tmp_path, payload) -> str:
        path = tmp_path / "thresholds.json"
        path.write_text(json.dumps(payload))
        return path

    def test_overrides_merge_into_defaults(self, tmp_path):
        tables = load_thresholds(self._write(tmp_path, {
            "version": "site-2025",
            "metrics": {"PUE": {"standard": 1.8, "good": 1.3, "better": 1.1}},
            "envelopes": {"class2": [50, 65, 80, 95]},
        }))
        assert tables.version == "site-2025"
        assert tables.scores[MetricId.PUE] == (1.8, 1.3, 1.1)
        assert tables.scores[MetricId.CSE] == DEFAULT_TABLES.scores[MetricId.CSE]
        assert envelope_for(2, tables).min_rec_f == 65
        assert envelope_for(1, tables) == envelope_for(1)
        assert rate(_m(MetricId.PUE, 1.4), tables).rating is Rating.STANDARD

    def test_misordered_triple(self, tmp_path):
        path = self._write(tmp_path, {"metrics": {"PUE": {"standard": 1.1, "good": 1.4,
                                                          "better": 2.0}}})
        with pytest.raises(ValidationError, match="not ordered"):
            load_thresholds(path)

    def test_unknown_metric(self, tmp_path):
        path = self._write(tmp_path, {"metrics": {"WUE": {"standard": 1, "good": 1,
                                                          "better": 1}}})
        with pytest.raises(ValidationError, match="unknown metric 'WUE'"):
            load_thresholds(path)

    def test_bad_envelope(self, tmp_path):
        path = self._write(tmp_path, {"envelopes": {"class1": [90, 80, 70, 60]}})
        with pytest.raises(ValidationError, match="envelope 'class1'"):
            load_thresholds(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_thresholds(tmp_path / "none.json")

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "thresholds.json"
        path.write_bytes(b'{"metrics": "\xff"}')
        with pytest.raises(ParseError, match="not valid UTF-8"):
            load_thresholds(path)
