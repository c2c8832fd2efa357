import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellwatch.detection import (
    auc_precision_recall,
    compute_metrics,
    detect,
    dissatisfied_visitors,
    precision_recall_at_k,
    rank_sites,
    suggest_xi,
)
from cellwatch.rng import stream
from tests.conftest import visits_from_rows


def pr_curve_oracle(ranked_ids, bad):
    """Independent step-by-step PR integration: walk the ranking, integrate
    precision over each recall increment as it happens."""
    omega = len(bad)
    area = 0.0
    hits = 0
    prev_recall = 0.0
    for k, site in enumerate(ranked_ids, start=1):
        if site in bad:
            hits += 1
        recall = hits / omega
        if recall > prev_recall:
            area += (recall - prev_recall) * (hits / k)
            prev_recall = recall
    return area


class TestDissatisfiedVisitors:
    def test_all_satisfied_gives_empty_sets(self, toy_visits):
        labels = np.zeros(5, dtype=np.uint8)
        for j in range(4):
            assert len(dissatisfied_visitors(toy_visits, labels, j, 0.2)) == 0

    def test_boundary_share_excluded(self):
        visits = visits_from_rows([[0.25, 0.75]])
        labels = np.array([1], dtype=np.uint8)
        assert len(dissatisfied_visitors(visits, labels, 0, 0.25)) == 0  # strict >
        assert len(dissatisfied_visitors(visits, labels, 1, 0.25)) == 1

    def test_matches_definition_on_toy_instance(self, toy_visits):
        labels = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
        xi = 0.2
        for j in range(4):
            expected = {
                i
                for i in range(5)
                if labels[i] == 1 and toy_visits.t[i, j] > xi * toy_visits.t[i].sum()
            }
            got = set(dissatisfied_visitors(toy_visits, labels, j, xi).tolist())
            assert got == expected


class TestRankSites:
    def test_single_devoted_dissatisfied_user(self):
        visits = visits_from_rows([[0, 0, 0, 0, 0, 0, 0, 0, 0, 1.0]])
        labels = np.array([1], dtype=np.uint8)
        ranking = rank_sites(visits, labels, 0.2)
        assert ranking.scores[9] == pytest.approx(1.0)
        assert ranking.scores[:9].sum() == 0
        assert ranking.ranked_ids[0] == 9

    def test_no_dissatisfied_users_yields_id_order(self, toy_visits):
        ranking = rank_sites(toy_visits, np.zeros(5, dtype=np.uint8), 0.2)
        assert (ranking.scores == 0).all()
        assert ranking.ranked_ids.tolist() == [0, 1, 2, 3]

    def test_matches_hand_enumerated_scores(self, toy_visits):
        labels = np.array([1, 1, 0, 1, 0], dtype=np.uint8)
        xi = 0.2
        expected = np.zeros(4)
        for i in np.flatnonzero(labels == 1):
            total = toy_visits.t[i].sum()
            for j in range(4):
                share = toy_visits.t[i, j] / total
                if share > xi:
                    expected[j] += share
        ranking = rank_sites(toy_visits, labels, xi)
        assert np.allclose(ranking.scores, expected)

    def test_per_user_scaling_invariance(self, toy_visits):
        from cellwatch.mobility import VisitMatrix

        labels = np.array([1, 0, 1, 0, 1], dtype=np.uint8)
        base = rank_sites(toy_visits, labels, 0.2)
        scaled_rows = toy_visits.t * np.array([[3.0], [1.0], [0.5], [1.0], [2.0]])
        # rows no longer share a horizon, so build the matrix piecewise
        shares = scaled_rows / scaled_rows.sum(axis=1, keepdims=True)
        rescaled = VisitMatrix(t=shares, horizon=1.0)
        again = rank_sites(rescaled, labels, 0.2)
        assert np.allclose(base.scores, again.scores)
        assert np.array_equal(base.ranked_ids, again.ranked_ids)


class TestPrecisionRecallAtK:
    def test_perfect_top_omega(self):
        ranked = np.array([3, 1, 4, 0, 2])
        p, r = precision_recall_at_k(ranked, {3, 1}, 2)
        assert (p, r) == (1.0, 1.0)

    def test_disjoint_top_k(self):
        ranked = np.array([0, 1, 2, 3, 4])
        p, r = precision_recall_at_k(ranked, {3, 4}, 2)
        assert (p, r) == (0.0, 0.0)

    def test_partial_hits_ratios(self):
        ranked = np.arange(20)
        bad = {0, 1, 2} | set(range(13, 23))
        p, r = precision_recall_at_k(ranked, bad, 5)
        assert p == pytest.approx(3 / 5)
        assert r == pytest.approx(3 / 13)

    def test_k_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            precision_recall_at_k(np.arange(5), {0}, 6)
        with pytest.raises(ValueError):
            precision_recall_at_k(np.arange(5), {0}, 0)


class TestAucPrecisionRecall:
    def test_perfect_ranking_is_one(self):
        ranked = np.arange(10)
        assert auc_precision_recall(ranked, {0, 1, 2}) == pytest.approx(1.0, abs=1e-9)

    def test_worst_single_site_ranking(self):
        ranked = np.arange(10)  # bad site ranked last
        assert auc_precision_recall(ranked, {9}) == pytest.approx(0.1, abs=1e-9)

    def test_random_rankings_match_independent_integrator(self):
        rng = stream(0, "auc")
        for _ in range(100):
            m = int(rng.integers(4, 21))
            omega = int(rng.integers(1, max(2, m // 3)))
            ranked = rng.permutation(m)
            bad = set(rng.choice(m, omega, replace=False).tolist())
            got = auc_precision_recall(ranked, bad)
            assert got == pytest.approx(pr_curve_oracle(ranked, bad), abs=1e-9)

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            auc_precision_recall(np.arange(5), set())
        with pytest.raises(ValueError):
            auc_precision_recall(np.array([]), {1})


class TestComputeMetrics:
    @given(
        st.integers(min_value=2, max_value=30),
        st.integers(min_value=0, max_value=10_000),
    )
    @settings(max_examples=60, deadline=None)
    def test_metric_identities(self, m, seed):
        from cellwatch.detection import RankingResult

        rng = stream(seed, "metrics")
        omega = int(rng.integers(1, m))
        ranked = rng.permutation(m)
        bad = frozenset(rng.choice(m, omega, replace=False).tolist())
        ranking = RankingResult(scores=np.zeros(m), ranked_ids=ranked, labels_used="full_truth")
        metrics = compute_metrics(ranking, bad)
        assert (np.diff(metrics.recall_at_k) >= -1e-12).all()
        assert metrics.recall_at_k[-1] == pytest.approx(1.0)
        hits_from_p = metrics.precision_at_k * np.arange(1, m + 1)
        hits_from_r = metrics.recall_at_k * omega
        assert np.allclose(hits_from_p, hits_from_r)
        assert 0.0 <= metrics.auc_pr <= 1.0
        assert metrics.recall_at_omega == pytest.approx(metrics.recall_at_k[omega - 1])


class TestDetect:
    def test_gt_only_equals_zero_zero_pipeline(self, toy_visits):
        labels = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
        gt_ids = np.array([0, 2])
        una = np.array([1, 3, 4])
        gt_ranking, gt_top = detect(toy_visits, gt_ids, labels[gt_ids], None, None, 0.2, 2)
        zz_ranking, zz_top = detect(
            toy_visits, gt_ids, labels[gt_ids], una, np.zeros(3, dtype=np.uint8), 0.2, 2
        )
        assert np.array_equal(gt_ranking.scores, zz_ranking.scores)
        assert np.array_equal(gt_ranking.ranked_ids, zz_ranking.ranked_ids)
        assert np.array_equal(gt_top, zz_top)
        assert gt_ranking.labels_used == "gt_only"
        assert zz_ranking.labels_used == "gt_plus_predicted"

    def test_k_equal_m_returns_all_sites(self, toy_visits):
        labels = np.ones(5, dtype=np.uint8)
        _, top = detect(toy_visits, np.arange(5), labels, None, None, 0.2, 4)
        assert sorted(top.tolist()) == [0, 1, 2, 3]

    def test_full_truth_matches_manual_composition(self, toy_visits):
        labels = np.array([1, 1, 0, 0, 1], dtype=np.uint8)
        ranking, top = detect(toy_visits, np.arange(5), labels, None, None, 0.3, 2)
        manual = rank_sites(toy_visits, labels, 0.3)
        assert np.array_equal(ranking.ranked_ids, manual.ranked_ids)
        assert np.array_equal(top, manual.ranked_ids[:2])
        assert ranking.labels_used == "full_truth"

    def test_overlapping_label_sets_rejected(self, toy_visits):
        with pytest.raises(ValueError, match="overlap"):
            detect(
                toy_visits,
                np.array([0, 1]),
                np.array([1, 0]),
                np.array([1, 2]),
                np.array([0, 0]),
                0.2,
                2,
            )


def test_suggest_xi_is_mean_of_top_two_average_shares(toy_visits):
    shares = np.sort(toy_visits.shares(), axis=1)[:, ::-1]
    expected = 0.5 * (shares[:, 0].mean() + shares[:, 1].mean())
    assert suggest_xi(toy_visits) == pytest.approx(expected)
