"""Scenario configuration: presets, file loading, overrides, resolution."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from .mobility import MobilityParams
from .topology import Box, Topology, generate_topology, load_topology

# Mobility presets: the two scenarios studied throughout, differing only in
# the exploration-decay exponent (S2 users rarely visit new sites).
MOBILITY_PRESETS: dict[str, dict[str, float]] = {
    "S1": {"rho": 0.6, "gamma": 0.21, "alpha": 0.55, "beta": 0.8},
    "S2": {"rho": 0.6, "gamma": 3.0, "alpha": 0.55, "beta": 0.8},
}

DEFAULT_SITES = 136


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TopologyConfig:
    source: str = "synthetic"  # "synthetic" | "file"
    sites: int = DEFAULT_SITES
    extent: tuple[float, float, float, float] | None = None  # x_min, x_max, y_min, y_max
    path: str | None = None
    delimiter: str = ","

    def build(self, seed: int) -> Topology:
        if self.source == "file":
            if not self.path:
                raise ConfigError("topology.source=file requires topology.path")
            return load_topology(self.path, delimiter=self.delimiter)
        if self.source == "synthetic":
            box = Box(*self.extent) if self.extent is not None else None
            return generate_topology(self.sites, box, rng_seed=seed)
        raise ConfigError(f"unknown topology source {self.source!r}")


@dataclass(frozen=True)
class MobilityConfig:
    preset: str | None = "S1"
    rho: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    beta: float | None = None
    jump_min: float | None = None
    jump_max: float | None = None
    wait_min: float | None = None
    wait_max: float | None = None
    horizon: float = 1.0

    def params(self) -> MobilityParams:
        base: dict[str, float] = {}
        if self.preset is not None:
            if self.preset not in MOBILITY_PRESETS:
                raise ConfigError(f"unknown mobility preset {self.preset!r}")
            base.update(MOBILITY_PRESETS[self.preset])
        for name in ("rho", "gamma", "alpha", "beta"):
            value = getattr(self, name)
            if value is not None:
                base[name] = value
            elif name not in base:
                raise ConfigError(f"mobility.{name} required when no preset is set")
        return MobilityParams(
            rho=base["rho"],
            gamma=base["gamma"],
            alpha=base["alpha"],
            beta=base["beta"],
            jump_min=self.jump_min,
            jump_max=self.jump_max,
            wait_min=self.wait_min,
            wait_max=self.wait_max,
            horizon=self.horizon,
        )


@dataclass(frozen=True)
class ProfileConfig:
    mu: float = 0.25
    sigma: float | None = None  # None: calibrate to the target range
    calibration_target: tuple[float, float] = (0.15, 0.30)
    calibration_fallback: str = "error"  # "error" | "nearest"
    psi: float = 0.0
    freeze_tolerances: bool = False


@dataclass(frozen=True)
class DeliverySettings:
    strategy: str = "none"  # "none" (full truth) | "random" | "optimized"
    response_rate: float = 0.01
    budget: int | None = None
    n_min: int = 3
    xi: float = 0.2

    def resolve_budget(self, n_users: int) -> int:
        if self.budget is not None:
            b = self.budget
        else:
            b = int(self.response_rate * n_users)
        b = max(1, b)
        if b > n_users:
            raise ConfigError(f"budget {b} exceeds population {n_users}")
        return b


@dataclass(frozen=True)
class ClassifierConfig:
    mode: str = "none"  # "none" (gt-only) | "point" | "reference" | "grid"
    fpr: float | None = None
    tpr: float | None = None
    step: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    population: int = 1000
    omega_fraction: float = 0.1
    omega: int | None = None
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    delivery: DeliverySettings = field(default_factory=DeliverySettings)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    detection_xi: float | None = None  # defaults to delivery.xi
    k: int | None = None  # defaults to omega
    repetitions: int = 1
    master_seed: int = 0
    regenerate_mobility: bool = True

    def __post_init__(self) -> None:
        if self.population < 1:
            raise ConfigError("population must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")

    def resolve_omega(self, n_sites: int) -> int:
        omega = self.omega if self.omega is not None else int(self.omega_fraction * n_sites)
        omega = max(1, omega)
        if omega >= n_sites:
            raise ConfigError(f"omega must be < number of sites, got {omega} of {n_sites}")
        return omega

    @property
    def xi_detection(self) -> float:
        return self.detection_xi if self.detection_xi is not None else self.delivery.xi

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        """Short stable hash of the fully resolved configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=_json_fallback)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _json_fallback(value: Any) -> Any:
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"not JSON-serializable: {value!r}")


_SECTION_TYPES = {
    "topology": TopologyConfig,
    "mobility": MobilityConfig,
    "profile": ProfileConfig,
    "delivery": DeliverySettings,
    "classifier": ClassifierConfig,
}

_TUPLE_FIELDS = {"extent", "calibration_target"}


def scenario_from_dict(data: dict[str, Any]) -> ScenarioConfig:
    """Build a ScenarioConfig from nested mappings (YAML / JSON payloads)."""
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            section_cls = _SECTION_TYPES[key]
            names = set(section_cls.__dataclass_fields__)
            unknown = set(value) - names
            if unknown:
                raise ConfigError(f"unknown keys in {key!r}: {sorted(unknown)}")
            coerced = {
                k: tuple(v) if k in _TUPLE_FIELDS and v is not None else v
                for k, v in value.items()
            }
            kwargs[key] = section_cls(**coerced)
        elif key in ScenarioConfig.__dataclass_fields__:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown scenario key {key!r}")
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        payload = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if payload is None:
        payload = {}
    scenario = payload.get("scenario", payload)
    return scenario_from_dict(scenario)


def apply_overrides(config: ScenarioConfig, overrides: dict[str, Any]) -> ScenarioConfig:
    """Apply dotted-path overrides, e.g. ``{"profile.mu": 0.15}``."""
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        if len(parts) == 1:
            name = parts[0]
            if name not in ScenarioConfig.__dataclass_fields__:
                raise ConfigError(f"unknown scenario field {name!r}")
            config = replace(config, **{name: _coerce_like(getattr(config, name), value)})
        elif len(parts) == 2:
            section_name, name = parts
            if section_name not in _SECTION_TYPES:
                raise ConfigError(f"unknown scenario section {section_name!r}")
            section = getattr(config, section_name)
            if name not in type(section).__dataclass_fields__:
                raise ConfigError(f"unknown field {dotted!r}")
            if name in _TUPLE_FIELDS and isinstance(value, (list, tuple)):
                value = tuple(value)
            section = replace(section, **{name: _coerce_like(getattr(section, name), value)})
            config = replace(config, **{section_name: section})
        else:
            raise ConfigError(f"override path too deep: {dotted!r}")
    return config


def _coerce_like(current: Any, value: Any) -> Any:
    """Parse string override values using the current value's type as a hint."""
    if not isinstance(value, str):
        return value
    if isinstance(current, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, tuple) or (current is None and "," in value):
        return tuple(float(v) for v in value.split(","))
    if current is None:
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                continue
    return value
