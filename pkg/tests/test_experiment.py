import dataclasses

import numpy as np
import pytest

from cellwatch.config import (
    ClassifierConfig,
    DeliverySettings,
    ProfileConfig,
    ScenarioConfig,
    TopologyConfig,
)
from cellwatch.experiment import (
    ScenarioRunner,
    density_label,
    run_scenario,
    sweep_gt_density,
    sweep_performance_cloud,
    sweep_xi_mu,
    visit_share_curve,
)
from cellwatch.results import emit_per_k, emit_ranking, emit_results, read_table


def small_config(**kwargs) -> ScenarioConfig:
    defaults = dict(
        topology=TopologyConfig(sites=20),
        population=300,
        profile=ProfileConfig(sigma=0.1),
        repetitions=2,
        master_seed=17,
    )
    defaults.update(kwargs)
    return ScenarioConfig(**defaults)


def assert_records_equal(ra, rb):
    skip = {"metrics", "ranking", "wall_time"}
    for field in dataclasses.fields(ra):
        if field.name in skip:
            continue
        assert getattr(ra, field.name) == getattr(rb, field.name), field.name
    assert np.array_equal(ra.metrics.precision_at_k, rb.metrics.precision_at_k)
    assert np.array_equal(ra.metrics.recall_at_k, rb.metrics.recall_at_k)
    assert np.array_equal(ra.ranking.ranked_ids, rb.ranking.ranked_ids)
    assert np.array_equal(ra.ranking.scores, rb.ranking.scores)


class TestRunScenario:
    def test_deterministic_record_sets(self):
        config = small_config()
        a = run_scenario(config)
        b = run_scenario(config)
        for ra, rb in zip(a.records, b.records):
            assert_records_equal(ra, rb)

    def test_full_truth_mode_has_no_coverage(self):
        result = run_scenario(small_config())
        for record in result.records:
            assert record.labels_used == "full_truth"
            assert record.coverage is None
            assert record.fpr is None

    def test_sampled_mode_records_coverage_and_spec(self):
        config = small_config(
            delivery=DeliverySettings(strategy="random", budget=30),
            classifier=ClassifierConfig(mode="point", fpr=0.1, tpr=0.6),
        )
        result = run_scenario(config)
        for record in result.records:
            assert record.labels_used == "gt_plus_predicted"
            assert 0.0 <= record.coverage <= 1.0
            assert (record.fpr, record.tpr) == (0.1, 0.6)
        assert result.metadata["budget"] == 30
        assert result.metadata["density_label"] == density_label(30 / 20)

    def test_reported_shortlist_defaults_to_omega(self):
        result = run_scenario(small_config())
        for record in result.records:
            assert record.k == result.metadata["omega"]
            assert len(record.top_k) == record.k

    def test_mobility_reuse_flag(self):
        frozen = small_config(regenerate_mobility=False)
        runner = ScenarioRunner(frozen)
        assert np.array_equal(runner.visits(0).t, runner.visits(1).t)
        fresh = ScenarioRunner(small_config())
        assert not np.array_equal(fresh.visits(0).t, fresh.visits(1).t)

    def test_tolerance_freeze_flag(self):
        config = small_config(profile=ProfileConfig(sigma=0.1, freeze_tolerances=True))
        runner = ScenarioRunner(config)
        assert np.array_equal(
            runner.tolerances(0, 0.25, 0.1), runner.tolerances(1, 0.25, 0.1)
        )

    def test_grid_classifier_mode_rejected_for_single_run(self):
        config = small_config(
            delivery=DeliverySettings(strategy="random", budget=30),
            classifier=ClassifierConfig(mode="grid", step=0.5),
        )
        with pytest.raises(Exception, match="sweep"):
            run_scenario(config)

    def test_calibrated_runs_land_in_target_band(self):
        config = small_config(
            population=2000,
            profile=ProfileConfig(mu=0.25),  # sigma=None: calibrate per repetition
            repetitions=2,
        )
        result = run_scenario(config)
        lo, hi = config.profile.calibration_target
        for record in result.records:
            assert lo <= record.dissatisfied_fraction <= hi

    def test_calibration_fallback_records_note(self):
        # mu=0.9 keeps the dissatisfied fraction far below 15% at any sigma
        config = small_config(
            profile=ProfileConfig(mu=0.9, calibration_fallback="nearest"),
            repetitions=1,
        )
        result = run_scenario(config)
        assert result.records[0].calibration_note is not None
        strict = small_config(profile=ProfileConfig(mu=0.9), repetitions=1)
        with pytest.raises(Exception, match="achieved"):
            run_scenario(strict)


class TestSweepXiMu:
    def test_single_cell_matches_run_scenario_mean(self):
        config = small_config()
        rows, _ = sweep_xi_mu(config, [0.2], [config.profile.mu])
        result = run_scenario(config)
        expected = float(np.mean([r.auc for r in result.records]))
        assert rows[0]["auc_mean"] == pytest.approx(expected)

    def test_grid_shape_and_range(self):
        rows, meta = sweep_xi_mu(small_config(), [0.1, 0.3, 0.5], [0.15, 0.25])
        assert len(rows) == 6
        assert all(0.0 <= row["auc_mean"] <= 1.0 for row in rows)
        assert meta["labels_used"] == "full_truth"

    def test_empty_grid_rejected(self):
        with pytest.raises(Exception, match="non-empty"):
            sweep_xi_mu(small_config(), [], [0.25])


class TestSweepPerformanceCloud:
    def make_config(self, repetitions=2):
        return small_config(
            delivery=DeliverySettings(strategy="random", budget=30),
            repetitions=repetitions,
        )

    def test_grid_step_half_gives_nine_points(self):
        rows, meta = sweep_performance_cloud(self.make_config(), 0.5)
        assert len(rows) == 9
        assert meta["grid_points"] == 9

    def test_origin_point_equals_gt_only_baseline(self):
        config = self.make_config()
        rows, _ = sweep_performance_cloud(config, 0.5)
        origin = next(r for r in rows if r["fpr"] == 0.0 and r["tpr"] == 0.0)
        gt_only = run_scenario(
            dataclasses.replace(config, classifier=ClassifierConfig(mode="none"))
        )
        expected = float(np.mean([r.r_at_omega for r in gt_only.records]))
        assert origin["r_at_omega_mean"] == pytest.approx(expected)

    def test_requires_sampling_strategy(self):
        with pytest.raises(Exception, match="sampling"):
            sweep_performance_cloud(small_config(), 0.5)


class TestSweepGtDensity:
    def test_single_strategy_single_stratum(self):
        rows, meta = sweep_gt_density(small_config(), [0.5], strategies=("random",))
        assert len(rows) == 1
        assert rows[0]["strategy"] == "random"
        assert rows[0]["budget"] == 10  # 0.5 users/site * 20 sites
        assert "crossover_density" in meta

    def test_density_labels(self):
        assert density_label(0.073) == "low"
        assert density_label(0.73) == "medium"
        assert density_label(7.35) == "high"

    def test_optimized_covers_at_least_random(self):
        rows, _ = sweep_gt_density(
            small_config(repetitions=3), [1.0], strategies=("random", "optimized")
        )
        by_strategy = {row["strategy"]: row for row in rows}
        assert by_strategy["optimized"]["coverage"] >= by_strategy["random"]["coverage"]

    def test_unrealizable_density_rejected(self):
        with pytest.raises(Exception, match="budget"):
            sweep_gt_density(small_config(), [1000.0])


class TestVisitShares:
    def test_curve_is_normalized_and_non_increasing(self):
        rows = visit_share_curve(small_config())
        shares = [row["mean_share"] for row in rows]
        assert len(shares) == 20
        assert sum(shares) == pytest.approx(1.0)
        assert all(a >= b - 1e-12 for a, b in zip(shares, shares[1:]))


class TestEmission:
    def test_run_records_round_trip(self, tmp_path):
        result = run_scenario(small_config())
        path = tmp_path / "records.csv"
        emit_results(result, path)
        meta, rows = read_table(path)
        assert meta["schema"] == "run_records"
        assert len(rows) == 2
        assert float(rows[0]["auc"]) == pytest.approx(result.records[0].auc, abs=1e-5)

    def test_jsonl_round_trip(self, tmp_path):
        result = run_scenario(small_config())
        path = tmp_path / "records.jsonl"
        emit_results(result, path, fmt="jsonl")
        meta, rows = read_table(path)
        assert meta["schema"] == "run_records"
        assert rows[0]["labels_used"] == "full_truth"

    def test_double_emit_byte_identical(self, tmp_path):
        result = run_scenario(small_config())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_results(result, a)
        emit_results(result, b)
        assert a.read_bytes() == b.read_bytes()

    def test_per_k_and_ranking_tables(self, tmp_path):
        result = run_scenario(small_config(repetitions=1))
        per_k = tmp_path / "per_k.csv"
        ranking = tmp_path / "ranking.csv"
        emit_per_k(result, per_k)
        emit_ranking(result, ranking)
        _, k_rows = read_table(per_k)
        _, r_rows = read_table(ranking)
        assert len(k_rows) == 20  # one row per k
        assert len(r_rows) == 20  # one row per rank
        assert [int(r["k"]) for r in k_rows] == list(range(1, 21))
