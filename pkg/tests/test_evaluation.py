"""
Tests for holdout evaluation, cross-seed aggregation, ranking, confidence calibration and parameter recovery
"""
import csv
import math

import pytest

from pysysid.CalibError import EmptyInputError, MissingRecordingError
from pysysid.Control import ControlBounds, training_profile
from pysysid.Evaluation import (HOLDOUT_COLUMNS, HoldoutEntry, HoldoutReport, aggregate_seeds, amplitude_report, average_rank,
                                confidence_precision, confidence_records, evaluate_holdout, format_rank_summary,
                                holdout_breakdown, make_confidence_record, precision_curve, rank_table, read_holdout_csv,
                                recovery_report, seed_means, write_confidence_csv, write_holdout_csv, write_ranks_csv,
                                write_recovery_csv)
from pysysid.ParameterSpace import ParameterBounds, ParameterVector, normalized_distance
from pysysid.Platforms import Platforms
from pysysid.recommenders import IterationRecord, RunHistory
from pysysid.sim.Scenario import ground_truth_scenario

TABLE = {
    "finger": {"Random": 27.8, "Nelder-Mead": 17.2, "Golden-CD": 12.1, "BO": 16.1, "CMA-ES": 15.3, "VLM": 10.9},
    "tentacle_air": {"Random": 54.3, "Nelder-Mead": 57.3, "Golden-CD": 53.4, "BO": 62.4, "CMA-ES": 52.1, "VLM": 53.0},
    "tentacle_water": {"Random": 76.1, "Nelder-Mead": 80.7, "Golden-CD": 77.8, "BO": 71.7, "CMA-ES": 77.6, "VLM": 73.3},
}
"""Mean holdout error per setting and method"""

SHORT = dict(duration=4.0, settle=0.0, skip=1.0, max_lag=0.5)


@pytest.fixture
def cbounds():
    return ControlBounds("tentacle", ["amp_rad"], [0.2], [1.0], [0.15])

def history_of(bounds, cbounds, rows):
    """RunHistory from (values, error, confidence, amplitude) rows"""
    records = [IterationRecord(k, ParameterVector(bounds, values), training_profile(cbounds, [amplitude]), error, confidence,
                               "", k, 0, ())
               for k, (values, error, confidence, amplitude) in enumerate(rows, start=1)]
    return RunHistory(bounds, cbounds, records)


class TestAggregateSeeds:
    def test_table_values(self):
        a = aggregate_seeds([8.2, 4.9, 19.5])
        assert round(a.mean, 1) == 10.9
        assert round(a.std, 1) == 6.3
        assert a.best == 4.9 and a.n == 3
        b = aggregate_seeds([12.3, 12.2, 11.9])
        assert (round(b.mean, 1), round(b.std, 1)) == (12.1, 0.2)

    def test_single_seed(self):
        assert aggregate_seeds([3.0]).std == 0.0

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            aggregate_seeds([])


class TestRanking:
    def test_table_average_ranks(self):
        averages = average_rank(TABLE)
        assert {m: round(r, 1) for m, r in averages.items()} == {
            "VLM": 1.7, "CMA-ES": 2.7, "Golden-CD": 3.3, "BO": 3.7, "Random": 4.3, "Nelder-Mead": 5.3}

    def test_per_setting_ranks(self):
        ranks = rank_table(TABLE)
        assert ranks["finger"]["VLM"] == 1.0
        assert ranks["tentacle_air"]["BO"] == 6.0
        assert ranks["tentacle_water"]["Random"] == 3.0

    def test_monotone_transform_keeps_ranks(self):
        transformed = {setting: dict(per_method) for setting, per_method in TABLE.items()}
        transformed["finger"] = {m: math.log(v) for m, v in TABLE["finger"].items()}
        transformed["tentacle_water"] = {m: 3.0 * v ** 2 + 1.0 for m, v in TABLE["tentacle_water"].items()}
        assert average_rank(transformed) == pytest.approx(average_rank(TABLE))
        assert rank_table(transformed) == rank_table(TABLE)

    def test_ties_share_average(self):
        ranks = rank_table({"finger": {"a": 1.0, "b": 2.0, "c": 2.0, "d": 3.0}})
        assert dict(ranks["finger"]) == {"a": 1.0, "b": 2.5, "c": 2.5, "d": 4.0}

    def test_incomplete_method_excluded(self, caplog):
        means = {"finger": {"a": 1.0, "b": 2.0}, "tentacle_air": {"a": 3.0}}
        assert list(average_rank(means)) == ["a"]
        assert "excluded" in caplog.text

    def test_summary_and_csv(self, tmp_path):
        text = format_rank_summary(TABLE)
        vlm = [line for line in text.splitlines() if line.startswith("VLM")][0]
        assert vlm.split() == ["VLM", "10.9", "53.0", "73.3", "1.7"]
        path = tmp_path / "ranks.csv"
        write_ranks_csv(TABLE, str(path))
        rows = list(csv.DictReader(open(str(path))))
        assert len(rows) == 18 + 6
        average = {r["method"]: float(r["rank"]) for r in rows if r["setting"] == "average"}
        assert average["VLM"] == pytest.approx(5 / 3)


class TestConfidence:
    @pytest.fixture
    def records(self):
        high = [make_confidence_record(0.9 + 0.005 * (i % 3), 20.0, 10.0 if i < 17 else 30.0) for i in range(19)]
        low = [make_confidence_record(0.6, 20.0, 25.0) for _ in range(5)]
        catastrophic = [make_confidence_record(0.95, 150.0, 300.0) for _ in range(3)]
        return high + low + catastrophic

    def test_precision_at_threshold(self, records):
        precision, n = confidence_precision(records, 0.9)
        assert n == 19
        assert precision == pytest.approx(17 / 19)
        assert round(precision, 4) == 0.8947

    def test_catastrophic_kept_when_disabled(self, records):
        assert confidence_precision(records, 0.9, catastrophic=None)[1] == 22

    def test_threshold_above_all(self, records):
        assert confidence_precision(records, 0.99) == (None, 0)

    def test_curve_and_csv(self, records, tmp_path):
        curve = precision_curve(records)
        assert [row[0] for row in curve][:2] == [0.6, 0.65]
        assert curve[0][2] == 24
        path = tmp_path / "confidence.csv"
        write_confidence_csv({"VLM": records}, str(path), taus=(0.9, 0.99))
        rows = list(csv.DictReader(open(str(path))))
        assert rows[1]["precision"] == "" and rows[1]["n"] == "0"

    def test_records_from_history(self, square_bounds, cbounds):
        history = history_of(square_bounds, cbounds, [
            ([0.1, 0.1], 10.0, None, 0.5),
            ([0.2, 0.2], 8.0, 0.8, 0.5),
            ([0.3, 0.3], 9.0, 0.9, 0.5),
        ])
        records = confidence_records(history)
        assert [(r.confidence, r.error_before, r.error_after, r.success) for r in records] == [
            (0.8, 10.0, 8.0, True), (0.9, 8.0, 9.0, False)]


class TestRecovery:
    @pytest.fixture
    def bounds(self):
        return ParameterBounds([{"name": "youngs", "min": 10, "max": 200}, {"name": "density", "min": 50, "max": 200},
                                {"name": "poisson", "min": 1, "max": 10}, {"name": "damping", "min": 1, "max": 20}])

    def test_relative_errors(self, bounds, cbounds):
        gt = ParameterVector(bounds, [90.4, 114.3, 3.60, 11.4])
        histories = {
            0: history_of(bounds, cbounds, [([150, 60, 8, 2], 40.0, None, 0.5), ([88.0, 120.0, 3.5, 10.5], 2.0, 0.7, 0.5),
                                            ([100, 100, 5, 5], 6.0, 0.7, 0.5)]),
            1: history_of(bounds, cbounds, [([100, 100, 3, 12], 5.0, None, 0.5)]),
        }
        report = recovery_report(histories, {0: gt, 1: gt}, bounds)
        assert report.best_seed == 0
        assert [round(v, 1) for v in report.best_seed_errors.per_parameter.values()] == [2.7, 5.0, 2.8, 7.9]
        assert len(report.distances[0]) == 3
        estimate = ParameterVector(bounds, [88.0, 120.0, 3.5, 10.5])
        assert report.distances[0][2] == pytest.approx(normalized_distance(estimate, gt, bounds))
        assert report.distances[0][1] < report.distances[0][0]
        assert report.mean == pytest.approx(sum(report.mean_errors.values()) / 4)

    def test_recovery_csv(self, bounds, cbounds, tmp_path):
        gt = ParameterVector(bounds, [90.4, 114.3, 3.60, 11.4])
        report = recovery_report({0: history_of(bounds, cbounds, [([88.0, 120.0, 3.5, 10.5], 2.0, None, 0.5)])}, {0: gt}, bounds)
        path = tmp_path / "recovery.csv"
        write_recovery_csv({("tentacle_air", "VLM"): report}, str(path))
        rows = list(csv.DictReader(open(str(path))))
        assert [r["quantity"] for r in rows].count("distance") == 1
        assert [r["parameter"] for r in rows if r["quantity"] == "best_seed_relative_error"] == [
            "youngs", "density", "poisson", "damping", "mean"]

    def test_empty(self, bounds):
        with pytest.raises(EmptyInputError):
            recovery_report({}, {}, bounds)


class TestAmplitudes:
    def test_collapse_detected(self, square_bounds, cbounds, caplog):
        histories = {
            0: history_of(square_bounds, cbounds, [([0.5, 0.5], 3.0, None, 0.8), ([0.5, 0.5], 2.0, 0.6, 0.2)]),
            1: history_of(square_bounds, cbounds, [([0.5, 0.5], 3.0, None, 0.8), ([0.5, 0.5], 2.0, 0.6, 0.6)]),
        }
        report = amplitude_report(histories)
        assert report.collapsed == [0]
        assert report.rows[:2] == [(0, 1, "amp_rad", 0.8), (0, 2, "amp_rad", 0.2)]
        assert "collapsed" in caplog.text


class TestHoldoutReports:
    def report(self, method, seed, errors, setting="finger"):
        entries = [HoldoutEntry(h, r + 1, errors[i * 3 + r], ("missing",) if errors[i * 3 + r] is None else ())
                   for i, h in enumerate(["H1", "H2", "H3", "H4"]) for r in range(3)]
        return HoldoutReport(method, seed, setting, entries)

    def test_gaps_and_means(self):
        errors = [1.0] * 12
        errors[4] = None
        report = self.report("BO", 0, errors)
        assert report.gaps == [("H2", 2)]
        assert not report.complete
        assert report.mean == 1.0
        assert report.per_holdout()["H2"] == 1.0

    def test_csv_columns_and_reload(self, tmp_path):
        reports = [self.report("BO", s, [float(s + i) for i in range(12)]) for s in range(3)]
        path = tmp_path / "holdout.csv"
        write_holdout_csv(reports, str(path))
        assert open(str(path)).readline().strip().split(",") == HOLDOUT_COLUMNS
        loaded = read_holdout_csv(str(path))
        assert [r.mean for r in loaded] == [r.mean for r in reports]
        assert seed_means(loaded)[("finger", "BO")] == [5.5, 6.5, 7.5]

    def test_breakdown(self):
        reports = [self.report("BO", 0, [1.0] * 3 + [2.0] * 3 + [3.0] * 3 + [4.0] * 3),
                   self.report("BO", 1, [3.0] * 3 + [2.0] * 3 + [1.0] * 3 + [None] * 3)]
        breakdown = holdout_breakdown(reports)
        assert dict(breakdown["BO"]) == {"H1": 2.0, "H2": 2.0, "H3": 2.0, "H4": 4.0}


class MissingH2:
    """Observation source that lacks the second repeat of H2"""
    def __init__(self, source):
        self.source = source

    def observe(self, control, repeat=0):
        if control.name == "H2" and repeat == 1:
            raise MissingRecordingError("No recording for H2 repeat 2")
        return self.source.observe(control, repeat)

    def resolve(self, control):
        return control


class TestEvaluateHoldout:
    @pytest.fixture
    def scenario(self, finger_bounds):
        return ground_truth_scenario(Platforms.FINGER, 2, finger_bounds, duration=SHORT["duration"], settle=SHORT["settle"])

    def test_ground_truth_is_exact(self, scenario, finger_bounds):
        report = evaluate_holdout(scenario.gt, Platforms.FINGER, finger_bounds, scenario.source, repeats=2, method="gt", seed=2,
                                  **SHORT)
        assert [(e.holdout, e.repeat) for e in report.entries][:3] == [("H1", 1), ("H1", 2), ("H2", 1)]
        assert len(report.entries) == 8
        assert report.mean == pytest.approx(0.0, abs=1e-9)

    def test_missing_recording(self, scenario, finger_bounds, caplog):
        report = evaluate_holdout(scenario.gt, Platforms.FINGER, finger_bounds, MissingH2(scenario.source), repeats=3,
                                  workers=2, **SHORT)
        assert report.gaps == [("H2", 2)]
        assert len(report.entries) == 12
        assert "gaps" in caplog.text

    def test_diverged_params(self, scenario, finger_bounds, finger_physics):
        bad = ParameterVector(finger_physics, {"frictionloss": 0.0, "damping": -260.0, "armature": 0.1, "density": 1.0})
        report = evaluate_holdout(bad, Platforms.FINGER, finger_bounds, scenario.source, repeats=1, **SHORT)
        assert all(e.error == math.inf and e.flags == ("diverged",) for e in report.entries)
