"""Network-site layouts and the hidden set of under-performing sites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .rng import stream

# Default synthetic deployment: square box matching a ~180 km^2 urban area.
DEFAULT_AREA = 180.0
DEFAULT_SIDE = math.sqrt(DEFAULT_AREA)


class TopologyError(ValueError):
    """Raised for malformed site files or invalid layout parameters."""


@dataclass(frozen=True)
class Site:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Box:
    """Axis-aligned bounding box. May be degenerate (a point or segment)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise TopologyError("box has negative extent")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.x_max - self.x_min, self.y_max - self.y_min)

    def is_degenerate(self) -> bool:
        return self.x_max == self.x_min or self.y_max == self.y_min


def default_extent() -> Box:
    return Box(0.0, DEFAULT_SIDE, 0.0, DEFAULT_SIDE)


@dataclass(frozen=True)
class Topology:
    """Immutable site layout; safe to share across workers.

    ``underperforming`` is empty until planted.  Site ids are contiguous
    0..M-1 and index directly into the coordinate arrays.
    """

    sites: tuple[Site, ...]
    extent: Box
    underperforming: frozenset[int] = frozenset()
    _xy: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = [s.id for s in self.sites]
        if not ids:
            raise TopologyError("topology must contain at least one site")
        if ids != list(range(len(ids))):
            raise TopologyError("site ids must be unique and contiguous from 0")
        bad = [j for j in self.underperforming if not 0 <= j < len(ids)]
        if bad:
            raise TopologyError(f"under-performing ids out of range: {sorted(bad)}")
        xy = np.array([(s.x, s.y) for s in self.sites], dtype=np.float64)
        object.__setattr__(self, "_xy", xy)

    @property
    def size(self) -> int:
        return len(self.sites)

    @property
    def coordinates(self) -> np.ndarray:
        """Site coordinates as an (M, 2) array, row i = site i."""
        return self._xy

    def median_nn_distance(self) -> float:
        """Median over sites of the distance to the nearest other site."""
        if self.size < 2:
            raise TopologyError("nearest-neighbour distance needs >= 2 sites")
        xy = self._xy
        d2 = ((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        return float(np.median(np.sqrt(d2.min(axis=1))))


def _extent_of(xy: np.ndarray) -> Box:
    return Box(
        float(xy[:, 0].min()),
        float(xy[:, 0].max()),
        float(xy[:, 1].min()),
        float(xy[:, 1].max()),
    )


def load_topology(path: str | Path, delimiter: str = ",") -> Topology:
    """Read a site file: one record per site, fields ``id, x, y``.

    A single leading header line is tolerated and skipped.  Ids must be
    unique and contiguous from 0; records may appear in any order.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise TopologyError(f"cannot read site file {path}: {exc}") from exc

    records: list[tuple[int, float, float]] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = [p.strip() for p in text.split(delimiter)]
        if len(parts) != 3:
            raise TopologyError(f"{path}:{lineno}: expected 3 fields, got {len(parts)}")
        try:
            rec = (int(parts[0]), float(parts[1]), float(parts[2]))
        except ValueError as exc:
            if lineno == 1 and not records:
                continue  # header line
            raise TopologyError(f"{path}:{lineno}: cannot parse record: {text!r}") from exc
        records.append(rec)

    if not records:
        raise TopologyError(f"{path}: no site records found")
    seen: set[int] = set()
    for sid, _, _ in records:
        if sid in seen:
            raise TopologyError(f"{path}: duplicate site id {sid}")
        seen.add(sid)
    if seen != set(range(len(records))):
        raise TopologyError(f"{path}: site ids must be contiguous 0..{len(records) - 1}")

    records.sort(key=lambda r: r[0])
    sites = tuple(Site(sid, x, y) for sid, x, y in records)
    xy = np.array([(s.x, s.y) for s in sites])
    return Topology(sites=sites, extent=_extent_of(xy))


def generate_topology(n_sites: int, extent: Box | None = None, rng_seed: int = 0) -> Topology:
    """Scatter ``n_sites`` uniformly over ``extent`` (default ~180 area units square)."""
    if n_sites < 1:
        raise TopologyError("n_sites must be >= 1")
    box = extent if extent is not None else default_extent()
    if n_sites > 1 and box.is_degenerate():
        raise TopologyError("extent must be non-degenerate")
    rng = stream(rng_seed, "topology")
    xs = rng.uniform(box.x_min, box.x_max, n_sites)
    ys = rng.uniform(box.y_min, box.y_max, n_sites)
    sites = tuple(Site(i, float(xs[i]), float(ys[i])) for i in range(n_sites))
    return Topology(sites=sites, extent=box)


def plant_underperforming(
    topology: Topology,
    n_underperforming: int,
    rng_seed: int,
    weights: np.ndarray | None = None,
) -> Topology:
    """Return a copy of ``topology`` with a hidden under-performing set.

    Sites are sampled without replacement, uniformly by default or according
    to ``weights`` (e.g. congestion-proportional selection).
    """
    m = topology.size
    if not 0 < n_underperforming < m:
        raise TopologyError(f"number of under-performing sites must be in (0, {m}), got {n_underperforming}")
    p = None
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (m,) or (w < 0).any() or w.sum() <= 0:
            raise TopologyError("weights must be M non-negative values with positive sum")
        p = w / w.sum()
    rng = stream(rng_seed, "plant")
    chosen = rng.choice(m, size=n_underperforming, replace=False, p=p)
    return replace(topology, underperforming=frozenset(int(j) for j in chosen))


def nearest_site(topology: Topology, point: tuple[float, float]) -> int:
    """Id of the site closest to ``point``; ties resolve to the lowest id."""
    xy = topology.coordinates
    d2 = (xy[:, 0] - point[0]) ** 2 + (xy[:, 1] - point[1]) ** 2
    return int(d2.argmin())  # argmin returns the first (lowest-id) minimum
