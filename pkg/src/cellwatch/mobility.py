"""Exploration / preferential-return mobility over a site layout.

Each user alternates waiting at their current site with a move decision:
with probability ``rho * S**-gamma`` (S = distinct sites visited so far) the
user jumps in a uniform direction with a fat-tailed jump length and lands on
the nearest site; otherwise they return to a previously visited site chosen
proportionally to past visit counts.  Waits and jumps follow truncated
power laws.  The output is the per-user, per-site visit-time matrix whose
rows each sum to the horizon exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .rng import derive_seed, stream
from .topology import Topology

_WAIT_BLOCK = 512

# Default wait-law cutoffs as fractions of the horizon.  The upper cutoff is
# the horizon itself: occasional near-horizon waits give each user a dominant
# "home" site next to a long tail of briefly visited ones, which is the visit
# profile the detection pipeline is calibrated against.
DEFAULT_WAIT_LO_FRACTION = 1.0 / 200.0
DEFAULT_WAIT_HI_FRACTION = 1.0


@dataclass(frozen=True)
class MobilityParams:
    """Hyper-parameters of the mobility model.

    ``jump_min``/``jump_max`` may be left unset; they then default to the
    topology's median nearest-neighbour distance and extent diagonal, tying
    the jump law to the layout scale.  Wait cutoffs default to
    ``horizon/200`` and ``horizon``.
    """

    rho: float = 0.6
    gamma: float = 0.21
    alpha: float = 0.55
    beta: float = 0.8
    jump_min: float | None = None
    jump_max: float | None = None
    wait_min: float | None = None
    wait_max: float | None = None
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not 0 <= self.rho <= 1:
            # rho = 0 is the degenerate never-explore profile.
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("tail exponents alpha and beta must be > 0")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        for lo, hi, name in (
            (self.jump_min, self.jump_max, "jump"),
            (self.wait_min, self.wait_max, "wait"),
        ):
            if lo is not None and hi is not None and not 0 < lo < hi:
                raise ValueError(f"{name} bounds must satisfy 0 < min < max")

    def resolved(self, topology: Topology) -> "MobilityParams":
        """Fill unset cutoffs from the topology and horizon."""
        wait_min = self.wait_min if self.wait_min is not None else self.horizon * DEFAULT_WAIT_LO_FRACTION
        wait_max = self.wait_max if self.wait_max is not None else self.horizon * DEFAULT_WAIT_HI_FRACTION
        jump_min, jump_max = self.jump_min, self.jump_max
        if jump_min is None or jump_max is None:
            if topology.size > 1:
                d_nn = topology.median_nn_distance()
                diag = topology.extent.diagonal
            else:
                d_nn, diag = 1.0, 2.0  # single site: jump length is irrelevant
            if jump_min is None:
                jump_min = d_nn
            if jump_max is None:
                jump_max = diag
            if jump_max <= jump_min:
                jump_max = 2.0 * jump_min
        return replace(
            self,
            jump_min=jump_min,
            jump_max=jump_max,
            wait_min=wait_min,
            wait_max=wait_max,
        )


def exploration_probability(rho: float, gamma: float, n_visited: int) -> float:
    """Probability of exploring a new place after having visited ``n_visited`` sites."""
    if n_visited < 1:
        raise ValueError("n_visited must be >= 1")
    return min(1.0, rho * n_visited ** -gamma)


def sample_power_law(
    exponent: float,
    lo: float,
    hi: float,
    rng: np.random.Generator,
    size: int | None = None,
):
    """Draw from the truncated power law with density ~ v**-(1 + exponent) on [lo, hi].

    Uses the inverse-CDF transform; returns a scalar when ``size`` is None.
    """
    if not 0 < lo < hi:
        raise ValueError(f"bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    if exponent <= 0:
        raise ValueError(f"exponent must be > 0, got {exponent}")
    u = rng.random(size)
    lo_pow = lo**-exponent
    hi_pow = hi**-exponent
    return (lo_pow - u * (lo_pow - hi_pow)) ** (-1.0 / exponent)


def preferential_return_choice(visit_counts: np.ndarray, rng: np.random.Generator) -> int:
    """Pick a site with probability proportional to its visit count."""
    counts = np.asarray(visit_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("at least one visit count must be positive")
    return int(rng.choice(len(counts), p=counts / total))


@dataclass(frozen=True)
class VisitMatrix:
    """N x M matrix of visit times; every row sums to the horizon."""

    t: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.float64)
        if t.ndim != 2:
            raise ValueError("visit matrix must be 2-dimensional")
        if (t < 0).any():
            raise ValueError("visit times must be non-negative")
        row_sums = t.sum(axis=1)
        if not np.allclose(row_sums, self.horizon, rtol=1e-9, atol=0):
            worst = float(np.abs(row_sums - self.horizon).max())
            raise ValueError(f"row sums must equal the horizon (worst deviation {worst:g})")
        object.__setattr__(self, "t", t)

    @property
    def n_users(self) -> int:
        return self.t.shape[0]

    @property
    def n_sites(self) -> int:
        return self.t.shape[1]

    def shares(self) -> np.ndarray:
        """Per-user visit-time fractions (rows sum to 1)."""
        return self.t / self.t.sum(axis=1, keepdims=True)


def _draw_waits(params: MobilityParams, rng: np.random.Generator) -> np.ndarray:
    """Waits covering the horizon; the last one is clipped to land exactly on it."""
    waits = sample_power_law(params.beta, params.wait_min, params.wait_max, rng, _WAIT_BLOCK)
    total = np.cumsum(waits)
    while total[-1] < params.horizon:
        waits = np.concatenate(
            [waits, sample_power_law(params.beta, params.wait_min, params.wait_max, rng, _WAIT_BLOCK)]
        )
        total = np.cumsum(waits)
    k = int(np.searchsorted(total, params.horizon)) + 1
    waits = waits[:k].copy()
    waits[-1] = params.horizon - (total[k - 2] if k > 1 else 0.0)
    return waits


def simulate_user(topology: Topology, params: MobilityParams, user_seed: int) -> np.ndarray:
    """Simulate one trajectory; returns the user's visit-time row (length M).

    The user starts at a uniformly random site.  Preferential return is
    implemented by sampling a uniform element of the visit history, which is
    exactly count-proportional selection.
    """
    params = params.resolved(topology)
    rng = np.random.default_rng(user_seed)
    m = topology.size
    xy = topology.coordinates
    xs, ys = xy[:, 0], xy[:, 1]

    current = int(rng.integers(m))
    visited = np.zeros(m, dtype=bool)
    visited[current] = True
    n_visited = 1
    history = [current]
    row = np.zeros(m)

    waits = _draw_waits(params, rng)
    n_moves = len(waits) - 1
    u_move = rng.random(n_moves)
    u_return = rng.random(n_moves)
    theta = rng.random(n_moves) * (2.0 * math.pi)
    jump = sample_power_law(params.alpha, params.jump_min, params.jump_max, rng, n_moves)
    dx = jump * np.cos(theta)
    dy = jump * np.sin(theta)

    p_new = exploration_probability(params.rho, params.gamma, n_visited)
    for i in range(n_moves):
        row[current] += waits[i]
        if u_move[i] < p_new:
            px = xs[current] + dx[i]
            py = ys[current] + dy[i]
            current = int(((xs - px) ** 2 + (ys - py) ** 2).argmin())
            if not visited[current]:
                visited[current] = True
                n_visited += 1
                p_new = exploration_probability(params.rho, params.gamma, n_visited)
        else:
            current = history[int(u_return[i] * len(history))]
        history.append(current)
    row[current] += waits[-1]
    return row


def simulate_population(
    topology: Topology,
    params: MobilityParams,
    n_users: int,
    master_seed: int,
) -> VisitMatrix:
    """Simulate ``n_users`` independent trajectories.

    User ``i`` draws from a stream derived from ``(master_seed, i)``, so the
    result is a pure function of the arguments regardless of execution order.
    """
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    params = params.resolved(topology)
    t = np.empty((n_users, topology.size))
    for i in range(n_users):
        t[i] = simulate_user(topology, params, derive_seed(master_seed, "user", i))
    return VisitMatrix(t=t, horizon=params.horizon)


# -- persistence --------------------------------------------------------------
#
# Text form: '#' header carrying N, M and the horizon, then one delimited row
# per user with %.17g floats (round-trips float64 bit-exactly).  Binary form:
# a NumPy .npz container with the same payload.


def save_visit_matrix(visits: VisitMatrix, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".npz":
        np.savez_compressed(path, t=visits.t, horizon=np.float64(visits.horizon))
        return
    header = f"# visits n_users={visits.n_users} n_sites={visits.n_sites} horizon={visits.horizon!r}\n"
    with path.open("w") as fh:
        fh.write(header)
        np.savetxt(fh, visits.t, fmt="%.17g", delimiter=",")


def load_visit_matrix(path: str | Path) -> VisitMatrix:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            return VisitMatrix(t=data["t"], horizon=float(data["horizon"]))
    with path.open() as fh:
        first = fh.readline()
        if not first.startswith("# visits"):
            raise ValueError(f"{path}: missing visit-matrix header")
        fields = dict(item.split("=") for item in first.removeprefix("# visits").split())
        horizon = float(fields["horizon"])
        t = np.loadtxt(fh, delimiter=",", ndmin=2)
    return VisitMatrix(t=t, horizon=horizon)
