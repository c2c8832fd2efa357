import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellwatch.mobility import (
    MobilityParams,
    VisitMatrix,
    exploration_probability,
    load_visit_matrix,
    preferential_return_choice,
    sample_power_law,
    save_visit_matrix,
    simulate_population,
    simulate_user,
)
from cellwatch.rng import derive_seed, stream
from cellwatch.topology import Box, generate_topology


def truncated_pareto_cdf(v, exponent, lo, hi):
    """Analytic CDF of the density ~ v**-(1+exponent) on [lo, hi]."""
    v = np.clip(v, lo, hi)
    return (lo**-exponent - v**-exponent) / (lo**-exponent - hi**-exponent)


class TestExplorationProbability:
    def test_first_step_equals_rho(self):
        assert exploration_probability(0.6, 0.21, 1) == pytest.approx(0.6)

    def test_direct_evaluation(self):
        assert exploration_probability(0.6, 3.0, 2) == pytest.approx(0.075)

    def test_monotone_decrease_toward_zero(self):
        values = [exploration_probability(0.6, 0.21, s) for s in (1, 2, 5, 50, 5000, 10**9)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-1

    def test_zero_visited_rejected(self):
        with pytest.raises(ValueError):
            exploration_probability(0.6, 0.21, 0)

    def test_clamped_to_one(self):
        assert exploration_probability(1.0, 0.0, 1) == 1.0


class TestSamplePowerLaw:
    def test_draws_within_bounds(self):
        rng = stream(0, "pareto")
        draws = sample_power_law(0.55, 0.3, 7.0, rng, 10_000)
        assert (draws >= 0.3).all() and (draws <= 7.0).all()

    def test_empirical_cdf_matches_analytic(self):
        # Oracle: the closed-form truncated CDF, computed independently above.
        rng = stream(1, "pareto")
        draws = np.sort(sample_power_law(0.8, 1e-3, 1.0, rng, 1_000_000))
        ecdf = np.arange(1, len(draws) + 1) / len(draws)
        sup = np.abs(ecdf - truncated_pareto_cdf(draws, 0.8, 1e-3, 1.0)).max()
        assert sup < 0.005

    def test_degenerate_support_concentrates_at_lo(self):
        rng = stream(2, "pareto")
        draws = sample_power_law(0.55, 1.0, 1.0 + 1e-9, rng, 1000)
        assert np.allclose(draws, 1.0, atol=1e-8)

    @pytest.mark.parametrize("lo,hi", [(0.0, 1.0), (2.0, 1.0), (-1.0, 1.0), (1.0, 1.0)])
    def test_invalid_bounds_rejected(self, lo, hi):
        with pytest.raises(ValueError):
            sample_power_law(0.5, lo, hi, stream(0))

    def test_invalid_exponent_rejected(self):
        with pytest.raises(ValueError):
            sample_power_law(0.0, 0.1, 1.0, stream(0))

    @given(
        st.floats(min_value=0.1, max_value=3.0),
        st.floats(min_value=1e-3, max_value=1.0),
        st.floats(min_value=1.5, max_value=50.0),
        st.integers(min_value=0, max_value=10_000),
    )
    @settings(max_examples=50, deadline=None)
    def test_bounds_property(self, exponent, lo, hi, seed):
        draws = sample_power_law(exponent, lo, hi, stream(seed), 64)
        assert (draws >= lo).all() and (draws <= hi).all()


class TestPreferentialReturn:
    def test_frequencies_match_count_ratio(self):
        rng = stream(3, "return")
        counts = np.array([3.0, 1.0])
        picks = np.array([preferential_return_choice(counts, rng) for _ in range(100_000)])
        assert abs((picks == 0).mean() - 0.75) < 0.01

    def test_single_positive_count_always_chosen(self):
        rng = stream(4)
        assert all(preferential_return_choice([5.0], rng) == 0 for _ in range(20))

    def test_symmetric_counts(self):
        rng = stream(5, "return")
        counts = np.array([1.0, 1.0])
        picks = np.array([preferential_return_choice(counts, rng) for _ in range(100_000)])
        assert abs((picks == 0).mean() - 0.5) < 0.01

    def test_all_zero_counts_rejected(self):
        with pytest.raises(ValueError):
            preferential_return_choice(np.zeros(3), stream(0))


class TestSimulateUser:
    def test_rho_zero_never_explores(self, small_topology):
        params = MobilityParams(rho=0.0, gamma=0.0)
        for seed in range(10):
            row = simulate_user(small_topology, params, user_seed=seed)
            assert (row > 0).sum() == 1
            assert row.sum() == pytest.approx(params.horizon)

    def test_row_sums_to_horizon_exactly(self, small_topology):
        params = MobilityParams(horizon=3.5)
        for seed in range(20):
            row = simulate_user(small_topology, params, user_seed=seed)
            assert abs(row.sum() - 3.5) <= 1e-9 * 3.5

    def test_higher_gamma_concentrates_top_site(self):
        topo = generate_topology(60, Box(0, 10, 0, 10), rng_seed=1)
        share_s1, share_s2 = [], []
        for seed in range(500):
            r1 = simulate_user(topo, MobilityParams(gamma=0.21), derive_seed(1, seed))
            r2 = simulate_user(topo, MobilityParams(gamma=3.0), derive_seed(2, seed))
            share_s1.append(r1.max() / r1.sum())
            share_s2.append(r2.max() / r2.sum())
        assert np.mean(share_s2) > np.mean(share_s1)

    def test_pure_exploration_visits_near_step_count(self):
        # gamma=0, rho=1: every move explores; on a dense layout nearly every
        # exploration lands somewhere new, so S approaches min(steps + 1, M).
        topo = generate_topology(900, Box(0, 30, 0, 30), rng_seed=6)
        params = MobilityParams(
            rho=1.0, gamma=0.0, wait_min=1 / 16, wait_max=1 / 15,  # ~15 moves
            jump_min=5.0, jump_max=45.0,  # extent-scale jumps: landings ~uniform
        )
        distinct = []
        for seed in range(200):
            row = simulate_user(topo, params, user_seed=derive_seed(3, seed))
            distinct.append((row > 0).sum())
        steps = math.ceil(1 / (1 / 15))
        assert max(distinct) <= steps + 1
        assert np.mean(distinct) > 0.85 * min(steps + 1, 900)


class TestSimulatePopulation:
    def test_deterministic_across_runs(self, small_topology):
        params = MobilityParams()
        a = simulate_population(small_topology, params, 50, master_seed=42)
        b = simulate_population(small_topology, params, 50, master_seed=42)
        assert np.array_equal(a.t, b.t)

    def test_rows_all_sum_to_horizon(self, small_topology):
        visits = simulate_population(small_topology, MobilityParams(), 200, master_seed=1)
        assert np.allclose(visits.t.sum(axis=1), 1.0, rtol=1e-9, atol=0)

    def test_user_rows_independent_of_population_size(self, small_topology):
        params = MobilityParams()
        small = simulate_population(small_topology, params, 10, master_seed=9)
        large = simulate_population(small_topology, params, 30, master_seed=9)
        assert np.array_equal(small.t, large.t[:10])

    def test_population_share_curve_non_increasing(self, small_topology):
        visits = simulate_population(small_topology, MobilityParams(), 300, master_seed=5)
        curve = np.sort(visits.shares(), axis=1)[:, ::-1].mean(axis=0)
        assert (np.diff(curve) <= 1e-12).all()

    def test_invalid_population_rejected(self, small_topology):
        with pytest.raises(ValueError):
            simulate_population(small_topology, MobilityParams(), 0, master_seed=0)


class TestVisitMatrixPersistence:
    def test_text_round_trip_bit_exact(self, tmp_path, small_topology):
        visits = simulate_population(small_topology, MobilityParams(), 40, master_seed=2)
        path = tmp_path / "visits.csv"
        save_visit_matrix(visits, path)
        loaded = load_visit_matrix(path)
        assert loaded.horizon == visits.horizon
        assert np.array_equal(loaded.t, visits.t)

    def test_binary_round_trip_bit_exact(self, tmp_path, small_topology):
        visits = simulate_population(small_topology, MobilityParams(horizon=2.0), 40, master_seed=2)
        path = tmp_path / "visits.npz"
        save_visit_matrix(visits, path)
        loaded = load_visit_matrix(path)
        assert loaded.horizon == visits.horizon
        assert np.array_equal(loaded.t, visits.t)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,0.0\n")
        with pytest.raises(ValueError, match="header"):
            load_visit_matrix(path)


class TestMobilityParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rho": -0.1},
            {"rho": 1.5},
            {"gamma": -1.0},
            {"alpha": 0.0},
            {"beta": -0.5},
            {"horizon": 0.0},
            {"wait_min": 0.2, "wait_max": 0.1},
            {"jump_min": 5.0, "jump_max": 1.0},
        ],
    )
    def test_invalid_params_rejected(self, kwargs):
        with pytest.raises(ValueError):
            MobilityParams(**kwargs)

    def test_resolved_fills_topology_scales(self, small_topology):
        params = MobilityParams().resolved(small_topology)
        assert params.jump_min == pytest.approx(small_topology.median_nn_distance())
        assert params.jump_max == pytest.approx(small_topology.extent.diagonal)
        assert params.wait_min == pytest.approx(1.0 / 200.0)
        assert params.wait_max == pytest.approx(1.0)

    def test_single_site_resolution(self):
        topo = generate_topology(1, Box(0, 1, 0, 1), rng_seed=0)
        params = MobilityParams().resolved(topo)
        assert 0 < params.jump_min < params.jump_max


def test_visit_matrix_rejects_bad_rows():
    with pytest.raises(ValueError, match="row sums"):
        VisitMatrix(t=np.array([[0.5, 0.4]]), horizon=1.0)
    with pytest.raises(ValueError, match="non-negative"):
        VisitMatrix(t=np.array([[1.5, -0.5]]), horizon=1.0)
