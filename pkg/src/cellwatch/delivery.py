"""Survey delivery: respondent sampling and network coverage.

A site counts as covered when at least ``n_min`` respondents each spend at
least a fraction ``xi`` of the horizon there.  Random delivery samples
respondents uniformly; optimized delivery picks them to maximize the number
of covered sites within a survey budget (greedy at scale, exact
branch-and-bound for small validation instances).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mobility import VisitMatrix

EXACT_SOLVER_MAX_USERS = 25


@dataclass(frozen=True)
class DeliveryConfig:
    budget: int
    strategy: str = "random"
    xi: float = 0.2
    n_min: int = 3

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.strategy not in ("random", "optimized"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0 < self.xi < 1:
            raise ValueError(f"xi must be in (0, 1), got {self.xi}")
        if self.n_min < 1:
            raise ValueError("n_min must be >= 1")


@dataclass(frozen=True)
class SurveyAssignment:
    """Respondent set with the coverage it achieves."""

    respondents: tuple[int, ...]
    covered_sites: frozenset[int]
    coverage: float
    strategy: str


def _qualifying(visits: VisitMatrix, xi: float) -> np.ndarray:
    """Boolean N x M matrix: user i spends at least xi of the horizon at site j."""
    return visits.t >= xi * visits.horizon


def coverage_indicator(
    visits: VisitMatrix,
    respondents,
    xi: float,
    n_min: int,
) -> frozenset[int]:
    """Sites covered by ``respondents`` under the (xi, n_min) rule."""
    if not 0 < xi < 1:
        raise ValueError(f"xi must be in (0, 1), got {xi}")
    if n_min < 1:
        raise ValueError("n_min must be >= 1")
    idx = np.asarray(sorted(set(int(i) for i in respondents)), dtype=np.intp)
    if len(idx) == 0:
        return frozenset()
    if idx[0] < 0 or idx[-1] >= visits.n_users:
        raise ValueError("respondent ids out of range")
    counts = _qualifying(visits, xi)[idx].sum(axis=0)
    return frozenset(int(j) for j in np.flatnonzero(counts >= n_min))


def _assignment(visits, respondents, xi, n_min, strategy) -> SurveyAssignment:
    covered = coverage_indicator(visits, respondents, xi, n_min)
    return SurveyAssignment(
        respondents=tuple(int(i) for i in respondents),
        covered_sites=covered,
        coverage=len(covered) / visits.n_sites,
        strategy=strategy,
    )


def random_delivery(
    visits: VisitMatrix,
    budget: int,
    xi: float,
    n_min: int,
    rng: np.random.Generator,
) -> SurveyAssignment:
    """Sample ``budget`` respondents uniformly without replacement."""
    n = visits.n_users
    if not 1 <= budget <= n:
        raise ValueError(f"budget must be in [1, {n}], got {budget}")
    chosen = np.sort(rng.choice(n, size=budget, replace=False))
    return _assignment(visits, chosen, xi, n_min, "random")


def greedy_max_coverage(
    visits: VisitMatrix,
    budget: int,
    xi: float,
    n_min: int,
) -> SurveyAssignment:
    """Greedy respondent selection maximizing covered sites.

    Each step picks the user adding the most newly covered sites; ties fall
    back to the largest gain in the coverage potential
    ``sum_j min(n_min, qualifying respondents at j) / n_min`` (credit for
    partial progress towards n_min), then to the user with the most
    qualifying sites overall, then to the lowest user id.  Selection stops at
    the budget or as soon as no user can increase the potential.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    q = _qualifying(visits, xi)
    n_users = visits.n_users
    totals = q.sum(axis=1)

    counts = np.zeros(visits.n_sites, dtype=np.int64)
    active = np.ones(n_users, dtype=bool)
    chosen: list[int] = []
    while len(chosen) < min(budget, n_users):
        about_to_cover = counts == n_min - 1
        unsaturated = counts < n_min
        gain_cover = q[:, about_to_cover].sum(axis=1)
        gain_potential = q[:, unsaturated].sum(axis=1)
        gain_cover[~active] = -1
        gain_potential[~active] = -1
        if gain_potential.max() <= 0:
            break
        best = np.flatnonzero(gain_cover == gain_cover.max())
        best = best[gain_potential[best] == gain_potential[best].max()]
        best = best[totals[best] == totals[best].max()]
        pick = int(best.min())
        chosen.append(pick)
        active[pick] = False
        counts += q[pick]
    return _assignment(visits, chosen, xi, n_min, "optimized")


def exact_max_coverage(
    visits: VisitMatrix,
    budget: int,
    xi: float,
    n_min: int,
    max_users: int = EXACT_SOLVER_MAX_USERS,
) -> SurveyAssignment:
    """Optimal respondent set by depth-first branch-and-bound.

    Explores include/exclude decisions per user, pruning with an optimistic
    bound that combines (a) the sites still reachable given the undecided
    users and (b) the coverage potential attainable with the remaining
    budget.  Only users with at least one qualifying site are branched on.
    Raises when the instance exceeds ``max_users``; use the greedy solver for
    production-scale instances.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    n = visits.n_users
    if n > max_users:
        raise ValueError(
            f"exact solver limited to {max_users} users, got {n}; use greedy_max_coverage"
        )
    q = _qualifying(visits, xi)
    users = [i for i in range(n) if q[i].any()]
    # Branching on high-coverage users first tightens the incumbent early.
    users.sort(key=lambda i: (-int(q[i].sum()), i))
    n_sites = visits.n_sites

    best_covered = -1
    best_set: list[int] = []

    suffix_q = np.zeros((len(users) + 1, n_sites), dtype=np.int64)
    for pos in range(len(users) - 1, -1, -1):
        suffix_q[pos] = suffix_q[pos + 1] + q[users[pos]]
    suffix_totals = [int(q[i].sum()) for i in users]

    def bound(pos: int, counts: np.ndarray, picked: int) -> float:
        remaining_budget = budget - picked
        covered_now = int((counts >= n_min).sum())
        if remaining_budget == 0 or pos == len(users):
            return covered_now
        reachable = counts + suffix_q[pos]
        bound_sites = int((reachable >= n_min).sum())
        potential_now = np.minimum(counts, n_min).sum() / n_min
        top = sorted(suffix_totals[pos:], reverse=True)[:remaining_budget]
        bound_potential = int(potential_now + sum(top) / n_min)
        return min(bound_sites, bound_potential)

    counts = np.zeros(n_sites, dtype=np.int64)

    def dfs(pos: int, picked: list[int]) -> None:
        nonlocal best_covered, best_set, counts
        covered_now = int((counts >= n_min).sum())
        if covered_now > best_covered:
            best_covered = covered_now
            best_set = list(picked)
        if pos == len(users) or len(picked) == budget:
            return
        if bound(pos, counts, len(picked)) <= best_covered:
            return
        user = users[pos]
        counts += q[user]
        picked.append(user)
        dfs(pos + 1, picked)
        picked.pop()
        counts -= q[user]
        dfs(pos + 1, picked)

    dfs(0, [])
    return _assignment(visits, sorted(best_set), xi, n_min, "optimized")
