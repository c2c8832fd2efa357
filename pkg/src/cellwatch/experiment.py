"""End-to-end seeded scenarios and parameter sweeps.

Seeds derive hierarchically: master -> repetition -> stage -> user, where the
stages are topology, plant, mobility, tolerance/sigma/noise, delivery and
classifier.  Sweeps therefore vary one stage while holding the randomness of
every other stage fixed, and the whole pipeline is a pure function of
(config, master seed).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import detection
from .classifier import ClassifierSpec, grid_info, reference_working_points, working_point_grid
from .config import ConfigError, ScenarioConfig
from .delivery import SurveyAssignment, greedy_max_coverage, random_delivery
from .detection import DetectionMetrics, RankingResult
from .mobility import VisitMatrix, simulate_population
from .rng import derive_seed, stream
from .satisfaction import (
    CalibrationError,
    apply_label_noise,
    calibrate_sigma,
    compute_satisfaction,
    draw_tolerances,
    nearest_feasible_sigma,
)
from .topology import Topology, plant_underperforming

DENSITY_LABELS = ((0.1, "low"), (1.0, "medium"))


def density_label(gt_users_per_site: float) -> str:
    for threshold, label in DENSITY_LABELS:
        if gt_users_per_site < threshold:
            return label
    return "high"


@dataclass(frozen=True)
class RunRecord:
    """One repetition of a scenario, self-describing via the config hash."""

    config_hash: str
    repetition: int
    seed: int
    labels_used: str
    dissatisfied_fraction: float
    sigma: float
    coverage: float | None
    fpr: float | None
    tpr: float | None
    auc: float
    r_at_omega: float
    omega: int
    k: int
    top_k: tuple[int, ...]
    metrics: DetectionMetrics = field(repr=False)
    ranking: RankingResult = field(repr=False)
    calibration_note: str | None = None
    wall_time: float = 0.0  # informational; never emitted to files


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    records: list[RunRecord]
    metadata: dict[str, Any]


class ScenarioRunner:
    """Builds stage artifacts for a scenario with cached, stage-seeded state."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.master = config.master_seed
        self.topology: Topology = config.topology.build(derive_seed(self.master, "topology"))
        self.params = config.mobility.params().resolved(self.topology)
        self.omega = config.resolve_omega(self.topology.size)
        self._visits: dict[int, VisitMatrix] = {}

    # -- per-repetition stages -------------------------------------------

    def _mobility_rep(self, rep: int) -> int:
        return rep if self.config.regenerate_mobility else 0

    def _tolerance_rep(self, rep: int) -> int:
        return 0 if self.config.profile.freeze_tolerances else rep

    def visits(self, rep: int) -> VisitMatrix:
        key = self._mobility_rep(rep)
        if key not in self._visits:
            seed = derive_seed(self.master, "rep", key, "mobility")
            self._visits[key] = simulate_population(
                self.topology, self.params, self.config.population, seed
            )
        return self._visits[key]

    def underperforming(self, rep: int) -> frozenset[int]:
        seed = derive_seed(self.master, "rep", rep, "plant")
        return plant_underperforming(self.topology, self.omega, seed).underperforming

    def sigma_for(self, rep: int, mu: float) -> tuple[float, str | None]:
        """Resolved tolerance spread and an optional calibration note."""
        profile = self.config.profile
        if profile.sigma is not None:
            return profile.sigma, None
        seed = derive_seed(self.master, "rep", self._tolerance_rep(rep), "sigma")
        visits = self.visits(rep)
        bad = self.underperforming(rep)
        try:
            return calibrate_sigma(visits, bad, mu, profile.calibration_target, seed), None
        except CalibrationError as exc:
            if profile.calibration_fallback != "nearest":
                raise
            sigma, achieved = nearest_feasible_sigma(
                visits, bad, mu, profile.calibration_target, seed
            )
            return sigma, f"calibration infeasible, nearest fraction {achieved:.4f}"

    def tolerances(self, rep: int, mu: float, sigma: float) -> np.ndarray:
        rng = stream(self.master, "rep", self._tolerance_rep(rep), "tolerance")
        return draw_tolerances(self.config.population, mu, sigma, rng)

    def satisfaction(self, rep: int, mu: float):
        """(labels, sigma, note) for one repetition at the given mean tolerance."""
        sigma, note = self.sigma_for(rep, mu)
        if self.config.profile.sigma is None and note is None:
            sigma, note = self._refine_sigma(rep, mu, sigma)
        tol = self.tolerances(rep, mu, sigma)
        sat = compute_satisfaction(self.visits(rep), self.underperforming(rep), tol)
        if self.config.profile.psi > 0:
            rng = stream(self.master, "rep", self._tolerance_rep(rep), "noise")
            sat = apply_label_noise(sat, self.config.profile.psi, rng)
        return sat, sigma, note

    def _refine_sigma(self, rep: int, mu: float, sigma: float) -> tuple[float, str | None]:
        """Nudge a probe-calibrated sigma until the repetition's own tolerance
        draw realizes a dissatisfied fraction inside the target band.

        The probe average can sit at the band edge, letting the actual draw
        land just outside; the rep's tolerance stream is fixed, so the realized
        fraction is a deterministic function of sigma and plain bisection over
        the calibration bracket applies.
        """
        from .satisfaction import SIGMA_BRACKET

        lo_target, hi_target = self.config.profile.calibration_target
        visits = self.visits(rep)
        bad = sorted(self.underperforming(rep))
        bad_time = visits.t[:, bad].sum(axis=1)

        def realized(candidate: float) -> float:
            tol = self.tolerances(rep, mu, candidate)
            return float((bad_time >= tol * visits.horizon).mean())

        if lo_target <= realized(sigma) <= hi_target:
            return sigma, None
        lo_sigma, hi_sigma = SIGMA_BRACKET
        for _ in range(60):
            mid = 0.5 * (lo_sigma + hi_sigma)
            frac = realized(mid)
            if frac > hi_target:
                hi_sigma = mid
            elif frac < lo_target:
                lo_sigma = mid
            else:
                return mid, None
        return sigma, f"calibrated sigma realizes fraction {realized(sigma):.4f} outside target"

    def survey(self, rep: int) -> SurveyAssignment:
        cfg = self.config.delivery
        budget = cfg.resolve_budget(self.config.population)
        visits = self.visits(rep)
        if cfg.strategy == "random":
            rng = stream(self.master, "rep", rep, "delivery")
            return random_delivery(visits, budget, cfg.xi, cfg.n_min, rng)
        if cfg.strategy == "optimized":
            return greedy_max_coverage(visits, budget, cfg.xi, cfg.n_min)
        raise ConfigError(f"delivery strategy {cfg.strategy!r} does not sample surveys")

    def classifier_uniforms(self, rep: int) -> np.ndarray:
        """One uniform per user, shared across working points of a sweep."""
        rng = stream(self.master, "rep", rep, "classifier")
        return rng.random(self.config.population)

    def predictions(
        self, rep: int, spec: ClassifierSpec, true_labels: np.ndarray, user_ids: np.ndarray
    ) -> np.ndarray:
        uniforms = self.classifier_uniforms(rep)[user_ids]
        hit_prob = np.where(true_labels[user_ids] == 1, spec.tpr, spec.fpr)
        return (uniforms < hit_prob).astype(np.uint8)


def _single_spec(config: ScenarioConfig) -> ClassifierSpec | None:
    cls = config.classifier
    if cls.mode == "none":
        return None
    if cls.mode == "point":
        if cls.fpr is None or cls.tpr is None:
            raise ConfigError("classifier.mode=point requires fpr and tpr")
        return ClassifierSpec(fpr=cls.fpr, tpr=cls.tpr)
    raise ConfigError(
        f"classifier.mode={cls.mode!r} is only valid in sweeps; use 'none' or 'point'"
    )


def _classifier_pool(config: ScenarioConfig) -> list[ClassifierSpec]:
    cls = config.classifier
    if cls.mode == "grid":
        if cls.step is None:
            raise ConfigError("classifier.mode=grid requires step")
        return working_point_grid(cls.step)
    if cls.mode == "point":
        return [_single_spec(config)]
    return reference_working_points()


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Run all repetitions of a scenario and collect one record per repetition."""
    runner = ScenarioRunner(config)
    spec = _single_spec(config) if config.delivery.strategy != "none" else None
    records = []
    for rep in range(config.repetitions):
        started = time.perf_counter()
        visits = runner.visits(rep)
        bad = runner.underperforming(rep)
        sat, sigma, note = runner.satisfaction(rep, config.profile.mu)
        n = config.population

        if config.delivery.strategy == "none":
            gt_ids = np.arange(n)
            gt_labels = sat.labels
            predicted_ids = predicted_labels = None
            coverage = None
        else:
            assignment = runner.survey(rep)
            gt_ids = np.asarray(assignment.respondents, dtype=np.int64)
            gt_labels = sat.labels[gt_ids]
            coverage = assignment.coverage
            if spec is None:
                predicted_ids = predicted_labels = None
            else:
                predicted_ids = np.setdiff1d(np.arange(n), gt_ids)
                predicted_labels = runner.predictions(rep, spec, sat.labels, predicted_ids)

        k = config.k if config.k is not None else runner.omega
        ranking, top_k = detection.detect(
            visits, gt_ids, gt_labels, predicted_ids, predicted_labels,
            config.xi_detection, k,
        )
        metrics = detection.compute_metrics(ranking, bad)
        records.append(
            RunRecord(
                config_hash=config.digest(),
                repetition=rep,
                seed=derive_seed(config.master_seed, "rep", rep),
                labels_used=ranking.labels_used,
                dissatisfied_fraction=sat.dissatisfied_fraction(),
                sigma=sigma,
                coverage=coverage,
                fpr=spec.fpr if spec else None,
                tpr=spec.tpr if spec else None,
                auc=metrics.auc_pr,
                r_at_omega=metrics.recall_at_omega,
                omega=runner.omega,
                k=k,
                top_k=tuple(int(j) for j in top_k),
                metrics=metrics,
                ranking=ranking,
                calibration_note=note,
                wall_time=time.perf_counter() - started,
            )
        )
    metadata = _base_metadata(config, runner)
    return ScenarioResult(config=config, records=records, metadata=metadata)


def _base_metadata(config: ScenarioConfig, runner: ScenarioRunner) -> dict[str, Any]:
    meta: dict[str, Any] = {
        "config": config.to_dict(),
        "config_hash": config.digest(),
        "sites": runner.topology.size,
        "omega": runner.omega,
        "population": config.population,
    }
    if config.delivery.strategy != "none":
        budget = config.delivery.resolve_budget(config.population)
        meta["budget"] = budget
        meta["gt_users_per_site"] = round(budget / runner.topology.size, 6)
        meta["density_label"] = density_label(budget / runner.topology.size)
    return meta


def visit_share_curve(config: ScenarioConfig) -> list[dict[str, Any]]:
    """Population-mean visit-time share per site rank, averaged over repetitions."""
    runner = ScenarioRunner(config)
    acc = np.zeros(runner.topology.size)
    for rep in range(config.repetitions):
        shares = np.sort(runner.visits(rep).shares(), axis=1)[:, ::-1]
        acc += shares.mean(axis=0)
    acc /= config.repetitions
    return [{"rank": i + 1, "mean_share": float(v)} for i, v in enumerate(acc)]


# -- sweeps -------------------------------------------------------------------


def sweep_xi_mu(
    config: ScenarioConfig,
    xi_values: Sequence[float],
    mu_values: Sequence[float],
) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    """Mean full-truth AUC per (xi, mu) cell; survey sampling is disabled."""
    if not xi_values or not mu_values:
        raise ConfigError("xi and mu grids must be non-empty")
    runner = ScenarioRunner(config)
    cells: dict[tuple[float, float], list[float]] = {
        (xi, mu): [] for xi in xi_values for mu in mu_values
    }
    for rep in range(config.repetitions):
        visits = runner.visits(rep)
        bad = runner.underperforming(rep)
        for mu in mu_values:
            sat, _, _ = runner.satisfaction(rep, mu)
            for xi in xi_values:
                ranking = detection.rank_sites(visits, sat.labels, xi)
                auc = detection.compute_metrics(ranking, bad).auc_pr
                cells[(xi, mu)].append(auc)
    rows = [
        {
            "xi": xi,
            "mu": mu,
            "auc_mean": float(np.mean(aucs)),
            "auc_std": float(np.std(aucs)),
            "repetitions": len(aucs),
        }
        for (xi, mu), aucs in sorted(cells.items())
    ]
    meta = _base_metadata(config, runner)
    meta["labels_used"] = detection.LABELS_FULL_TRUTH
    return rows, meta


def sweep_performance_cloud(
    config: ScenarioConfig,
    grid_step: float,
) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    """Mean recall at omega per (FPR, TPR) working point, survey sampling active.

    All points within a repetition share the survey assignment and the
    per-user classifier randomness, so moving across the grid changes only
    the working point (the (0, 0) corner reproduces gt-only detection
    exactly).
    """
    if config.delivery.strategy == "none":
        raise ConfigError("performance cloud requires a sampling delivery strategy")
    grid = working_point_grid(grid_step)
    runner = ScenarioRunner(config)
    by_point: dict[tuple[float, float], list[float]] = {(p.fpr, p.tpr): [] for p in grid}
    for rep in range(config.repetitions):
        visits = runner.visits(rep)
        bad = runner.underperforming(rep)
        sat, _, _ = runner.satisfaction(rep, config.profile.mu)
        assignment = runner.survey(rep)
        gt_ids = np.asarray(assignment.respondents, dtype=np.int64)
        una_ids = np.setdiff1d(np.arange(config.population), gt_ids)
        for spec in grid:
            predicted = runner.predictions(rep, spec, sat.labels, una_ids)
            ranking, _ = detection.detect(
                visits, gt_ids, sat.labels[gt_ids], una_ids, predicted,
                config.xi_detection, runner.omega,
            )
            metrics = detection.compute_metrics(ranking, bad)
            by_point[(spec.fpr, spec.tpr)].append(metrics.recall_at_omega)
    rows = [
        {
            "fpr": fpr,
            "tpr": tpr,
            "r_at_omega_mean": float(np.mean(vals)),
            "r_at_omega_std": float(np.std(vals)),
            "repetitions": len(vals),
        }
        for (fpr, tpr), vals in sorted(by_point.items())
    ]
    meta = _base_metadata(config, runner)
    meta["grid_step"] = grid_step
    meta.update(grid_info(grid_step))
    return rows, meta


def sweep_gt_density(
    config: ScenarioConfig,
    densities: Sequence[float],
    strategies: Sequence[str] = ("random", "optimized"),
) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    """Detection with gt-only vs best classifier labels across survey densities.

    Density is expressed as ground-truth respondents per site; the classifier
    column reports the best mean recall over the configured working points.
    """
    if not densities:
        raise ConfigError("density grid must be non-empty")
    for strategy in strategies:
        if strategy not in ("random", "optimized"):
            raise ConfigError(f"unknown delivery strategy {strategy!r}")
    pool = _classifier_pool(config)
    runner = ScenarioRunner(config)
    m = runner.topology.size
    rows = []
    crossovers: dict[str, float | None] = {}
    for strategy in strategies:
        strategy_rows = []
        for density in sorted(densities):
            budget = max(1, round(density * m))
            if budget > config.population:
                raise ConfigError(
                    f"density {density} needs budget {budget} > population {config.population}"
                )
            scenario = replace(
                config, delivery=replace(config.delivery, strategy=strategy, budget=budget)
            )
            sub_runner = ScenarioRunner(scenario)
            gt_vals: list[float] = []
            coverages: list[float] = []
            cls_vals: dict[tuple[float, float], list[float]] = {(p.fpr, p.tpr): [] for p in pool}
            for rep in range(config.repetitions):
                visits = sub_runner.visits(rep)
                bad = sub_runner.underperforming(rep)
                sat, _, _ = sub_runner.satisfaction(rep, config.profile.mu)
                assignment = sub_runner.survey(rep)
                gt_ids = np.asarray(assignment.respondents, dtype=np.int64)
                una_ids = np.setdiff1d(np.arange(config.population), gt_ids)
                coverages.append(assignment.coverage)
                ranking, _ = detection.detect(
                    visits, gt_ids, sat.labels[gt_ids], None, None,
                    config.xi_detection, sub_runner.omega,
                )
                gt_vals.append(detection.compute_metrics(ranking, bad).recall_at_omega)
                for spec in pool:
                    predicted = sub_runner.predictions(rep, spec, sat.labels, una_ids)
                    ranking, _ = detection.detect(
                        visits, gt_ids, sat.labels[gt_ids], una_ids, predicted,
                        config.xi_detection, sub_runner.omega,
                    )
                    cls_vals[(spec.fpr, spec.tpr)].append(
                        detection.compute_metrics(ranking, bad).recall_at_omega
                    )
            best_point, best_mean = max(
                ((point, float(np.mean(vals))) for point, vals in cls_vals.items()),
                key=lambda item: item[1],
            )
            strategy_rows.append(
                {
                    "density_label": density_label(budget / m),
                    "gt_users_per_site": round(budget / m, 6),
                    "strategy": strategy,
                    "budget": budget,
                    "r_gt_at_omega": float(np.mean(gt_vals)),
                    "r_c_at_omega": best_mean,
                    "best_fpr": best_point[0],
                    "best_tpr": best_point[1],
                    "coverage": float(np.mean(coverages)),
                }
            )
        crossovers[strategy] = next(
            (
                row["gt_users_per_site"]
                for row in strategy_rows
                if row["r_gt_at_omega"] >= row["r_c_at_omega"]
            ),
            None,
        )
        rows.extend(strategy_rows)
    meta = _base_metadata(config, runner)
    meta["crossover_density"] = crossovers
    meta["classifier_points"] = [[p.fpr, p.tpr] for p in pool]
    return rows, meta


# -- invariant suite ----------------------------------------------------------


def validation_checks(seed: int = 0, population: int = 200, sites: int = 24) -> list[dict[str, Any]]:
    """Fast self-checks of the pipeline's core invariants on a seeded scenario."""
    from . import mobility
    from .config import DeliverySettings, ProfileConfig, ScenarioConfig, TopologyConfig

    checks: list[dict[str, Any]] = []

    def check(name: str, passed: bool, detail: str = "") -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    config = ScenarioConfig(
        topology=TopologyConfig(sites=sites),
        population=population,
        profile=ProfileConfig(sigma=0.1),
        repetitions=1,
        master_seed=seed,
    )
    runner = ScenarioRunner(config)
    visits = runner.visits(0)

    row_err = float(np.abs(visits.t.sum(axis=1) - visits.horizon).max())
    check("visit-rows-sum-to-horizon", row_err <= 1e-9 * visits.horizon, f"max deviation {row_err:g}")

    rerun = ScenarioRunner(config).visits(0)
    check("mobility-deterministic", np.array_equal(visits.t, rerun.t))

    bad = runner.underperforming(0)
    check(
        "planting-valid",
        len(bad) == runner.omega and all(0 <= j < sites for j in bad),
        f"omega={runner.omega}",
    )

    from .delivery import coverage_indicator

    small = coverage_indicator(visits, range(10), 0.2, 1)
    large = coverage_indicator(visits, range(40), 0.2, 1)
    check("coverage-monotone", small <= large)

    sat, _, _ = runner.satisfaction(0, config.profile.mu)
    ranking = detection.rank_sites(visits, sat.labels, 0.2)
    ordered = ranking.scores[ranking.ranked_ids]
    check(
        "ranking-sorted-permutation",
        sorted(ranking.ranked_ids.tolist()) == list(range(sites)) and (np.diff(ordered) <= 0).all(),
    )

    metrics = detection.compute_metrics(ranking, bad)
    hits_p = metrics.precision_at_k * np.arange(1, sites + 1)
    hits_r = metrics.recall_at_k * len(bad)
    check(
        "metrics-consistent",
        (np.diff(metrics.recall_at_k) >= -1e-12).all() and np.allclose(hits_p, hits_r),
    )

    gt_ids = np.arange(0, population, 7)
    ranking_gt, _ = detection.detect(visits, gt_ids, sat.labels[gt_ids], None, None, 0.2, 5)
    una = np.setdiff1d(np.arange(population), gt_ids)
    ranking_00, _ = detection.detect(
        visits, gt_ids, sat.labels[gt_ids], una, np.zeros(len(una), dtype=np.uint8), 0.2, 5
    )
    check(
        "gt-only-equals-zero-classifier",
        np.array_equal(ranking_gt.ranked_ids, ranking_00.ranked_ids)
        and np.array_equal(ranking_gt.scores, ranking_00.scores),
    )

    draws = mobility.sample_power_law(0.55, 0.5, 4.0, stream(seed, "validate"), 200)
    check("power-law-in-bounds", bool((draws >= 0.5).all() and (draws <= 4.0).all()))

    return checks
