"""Ground-truth satisfaction labels from visit times and user tolerance.

A user is dissatisfied (label 1) when the time spent in under-performing
sites reaches their tolerance ``u_i`` (a fraction of the horizon), drawn from
a clamped Gaussian.  A configurable fraction of labels can be replaced by
coin flips to model feedback unrelated to network quality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobility import VisitMatrix

TOLERANCE_EPS = 1e-6

SIGMA_BRACKET = (1e-4, 0.5)


class CalibrationError(RuntimeError):
    """No tolerance spread in the search bracket hits the target fraction."""


@dataclass(frozen=True)
class UserProfileParams:
    mu: float
    sigma: float
    psi: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must be in (0, 1), got {self.mu}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 <= self.psi <= 1:
            raise ValueError(f"psi must be in [0, 1], got {self.psi}")


@dataclass(frozen=True)
class SatisfactionVector:
    """Binary labels (1 = dissatisfied) plus the realized tolerances."""

    labels: np.ndarray
    tolerances: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.uint8)
        tol = np.asarray(self.tolerances, dtype=np.float64)
        if labels.shape != tol.shape or labels.ndim != 1:
            raise ValueError("labels and tolerances must be 1-d and same length")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "tolerances", tol)

    @property
    def n_users(self) -> int:
        return len(self.labels)

    def dissatisfied_fraction(self) -> float:
        return float(self.labels.mean())


def draw_tolerances(n_users: int, mu: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """N i.i.d. Normal(mu, sigma^2) draws clamped into (0, 1)."""
    draws = rng.normal(mu, sigma, n_users)
    return np.clip(draws, TOLERANCE_EPS, 1.0 - TOLERANCE_EPS)


def compute_satisfaction(
    visits: VisitMatrix,
    underperforming: set[int] | frozenset[int],
    tolerances: np.ndarray,
) -> SatisfactionVector:
    """Label user i dissatisfied iff their under-performing visit time >= u_i * horizon.

    The comparison is inclusive at the boundary.  An empty under-performing
    set yields all-satisfied labels.
    """
    tol = np.asarray(tolerances, dtype=np.float64)
    if tol.shape != (visits.n_users,):
        raise ValueError("tolerances must have one entry per user")
    bad_ids = sorted(underperforming)
    if bad_ids and (bad_ids[0] < 0 or bad_ids[-1] >= visits.n_sites):
        raise ValueError("under-performing ids out of range")
    bad_time = visits.t[:, bad_ids].sum(axis=1) if bad_ids else np.zeros(visits.n_users)
    labels = (bad_time >= tol * visits.horizon).astype(np.uint8)
    return SatisfactionVector(labels=labels, tolerances=tol)


def apply_label_noise(
    satisfaction: SatisfactionVector,
    psi: float,
    rng: np.random.Generator,
) -> SatisfactionVector:
    """Redraw floor(psi * N) labels as fair coin flips, leaving the rest unchanged."""
    if not 0 <= psi <= 1:
        raise ValueError(f"psi must be in [0, 1], got {psi}")
    n = satisfaction.n_users
    n_noisy = int(psi * n)
    labels = satisfaction.labels.copy()
    if n_noisy > 0:
        chosen = rng.choice(n, size=n_noisy, replace=False)
        labels[chosen] = rng.integers(0, 2, size=n_noisy, dtype=np.uint8)
    return SatisfactionVector(labels=labels, tolerances=satisfaction.tolerances)


def calibrate_sigma(
    visits: VisitMatrix,
    underperforming: set[int] | frozenset[int],
    mu: float,
    target_range: tuple[float, float],
    rng_seed: int,
    redraws: int = 5,
    max_iterations: int = 60,
) -> float:
    """Bisect the tolerance spread until the dissatisfied fraction hits the target.

    Each candidate sigma is scored by the dissatisfied fraction averaged over
    ``redraws`` independent tolerance draws.  The fraction grows with sigma
    for the profiles of interest, so plain bisection over ``SIGMA_BRACKET``
    applies: move down when above the target, up when below, stop at the
    first candidate inside it.
    """
    lo_target, hi_target = target_range
    if not (0 <= lo_target < hi_target <= 1):
        raise ValueError(f"target range must satisfy 0 <= lo < hi <= 1, got {target_range}")
    if redraws < 1:
        raise ValueError("redraws must be >= 1")

    bad_ids = sorted(underperforming)
    bad_time = visits.t[:, bad_ids].sum(axis=1) if bad_ids else np.zeros(visits.n_users)

    def fraction_at(sigma: float, probe: int) -> float:
        fractions = []
        for r in range(redraws):
            rng = np.random.default_rng(_probe_seed(rng_seed, probe, r))
            tol = draw_tolerances(visits.n_users, mu, sigma, rng)
            fractions.append(float((bad_time >= tol * visits.horizon).mean()))
        return float(np.mean(fractions))

    lo_sigma, hi_sigma = SIGMA_BRACKET
    achieved: list[float] = []
    for probe in range(max_iterations):
        mid = 0.5 * (lo_sigma + hi_sigma)
        frac = fraction_at(mid, probe)
        achieved.append(frac)
        if frac > hi_target:
            hi_sigma = mid
        elif frac < lo_target:
            lo_sigma = mid
        else:
            return mid
    raise CalibrationError(
        f"no sigma in [{SIGMA_BRACKET[0]}, {SIGMA_BRACKET[1]}] reaches a dissatisfied "
        f"fraction in [{lo_target}, {hi_target}]; achieved fractions spanned "
        f"[{min(achieved):.4f}, {max(achieved):.4f}]"
    )


def nearest_feasible_sigma(
    visits: VisitMatrix,
    underperforming: set[int] | frozenset[int],
    mu: float,
    target_range: tuple[float, float],
    rng_seed: int,
    redraws: int = 5,
) -> tuple[float, float]:
    """Best-effort fallback when :func:`calibrate_sigma` reports infeasibility.

    Scans a geometric sigma grid over the bracket and returns the
    ``(sigma, fraction)`` pair whose average dissatisfied fraction is closest
    to the target interval.
    """
    lo_target, hi_target = target_range
    bad_ids = sorted(underperforming)
    bad_time = visits.t[:, bad_ids].sum(axis=1) if bad_ids else np.zeros(visits.n_users)
    best: tuple[float, float, float] | None = None
    for probe, sigma in enumerate(np.geomspace(SIGMA_BRACKET[0], SIGMA_BRACKET[1], 25)):
        fractions = []
        for r in range(redraws):
            rng = np.random.default_rng(_probe_seed(rng_seed, probe, r))
            tol = draw_tolerances(visits.n_users, mu, sigma, rng)
            fractions.append(float((bad_time >= tol * visits.horizon).mean()))
        frac = float(np.mean(fractions))
        distance = max(lo_target - frac, frac - hi_target, 0.0)
        if best is None or distance < best[0]:
            best = (distance, float(sigma), frac)
    assert best is not None
    return best[1], best[2]


def _probe_seed(rng_seed: int, probe: int, redraw: int) -> int:
    from .rng import derive_seed

    return derive_seed(rng_seed, "sigma-probe", probe, redraw)


def save_satisfaction(satisfaction: SatisfactionVector, path) -> None:
    """Write one ``user_id,label,tolerance`` record per user (%.17g round-trips)."""
    from pathlib import Path

    lines = ["user_id,label,tolerance"]
    for i, (label, tol) in enumerate(zip(satisfaction.labels, satisfaction.tolerances)):
        lines.append(f"{i},{int(label)},{tol:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_satisfaction(path) -> SatisfactionVector:
    from pathlib import Path

    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "user_id,label,tolerance":
        raise ValueError(f"{path}: not a satisfaction file")
    labels, tolerances = [], []
    for line in lines[1:]:
        _, label, tol = line.split(",")
        labels.append(int(label))
        tolerances.append(float(tol))
    return SatisfactionVector(
        labels=np.array(labels, dtype=np.uint8), tolerances=np.array(tolerances)
    )
