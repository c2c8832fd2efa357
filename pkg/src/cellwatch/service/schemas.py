"""Pydantic request/response models for the simulation service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

from ..config import ScenarioConfig, scenario_from_dict


class TopologyModel(BaseModel):
    source: Literal["synthetic", "file"] = "synthetic"
    sites: int = 136
    extent: Optional[tuple[float, float, float, float]] = None
    path: Optional[str] = None
    delimiter: str = ","


class MobilityModel(BaseModel):
    preset: Optional[Literal["S1", "S2"]] = "S1"
    rho: Optional[float] = None
    gamma: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    jump_min: Optional[float] = None
    jump_max: Optional[float] = None
    wait_min: Optional[float] = None
    wait_max: Optional[float] = None
    horizon: float = 1.0


class ProfileModel(BaseModel):
    mu: float = 0.25
    sigma: Optional[float] = None
    calibration_target: tuple[float, float] = (0.15, 0.30)
    calibration_fallback: Literal["error", "nearest"] = "error"
    psi: float = 0.0
    freeze_tolerances: bool = False


class DeliveryModel(BaseModel):
    strategy: Literal["none", "random", "optimized"] = "none"
    response_rate: float = 0.01
    budget: Optional[int] = None
    n_min: int = 3
    xi: float = 0.2


class ClassifierModel(BaseModel):
    mode: Literal["none", "point", "reference", "grid"] = "none"
    fpr: Optional[float] = None
    tpr: Optional[float] = None
    step: Optional[float] = None


class ScenarioModel(BaseModel):
    topology: TopologyModel = Field(default_factory=TopologyModel)
    mobility: MobilityModel = Field(default_factory=MobilityModel)
    population: int = 1000
    omega_fraction: float = 0.1
    omega: Optional[int] = None
    profile: ProfileModel = Field(default_factory=ProfileModel)
    delivery: DeliveryModel = Field(default_factory=DeliveryModel)
    classifier: ClassifierModel = Field(default_factory=ClassifierModel)
    detection_xi: Optional[float] = None
    k: Optional[int] = None
    repetitions: int = 1
    master_seed: int = 0
    regenerate_mobility: bool = True

    def to_config(self) -> ScenarioConfig:
        return scenario_from_dict(self.model_dump())


class RunRecordModel(BaseModel):
    config_hash: str
    repetition: int
    seed: int
    labels_used: str
    dissatisfied_fraction: float
    sigma: float
    coverage: Optional[float]
    fpr: Optional[float]
    tpr: Optional[float]
    auc: float
    r_at_omega: float
    omega: int
    k: int
    top_k: list[int]
    calibration_note: Optional[str] = None


class SimulateRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)


class SimulateResponse(BaseModel):
    records: list[RunRecordModel]
    metadata: dict[str, Any]


class SweepXiMuRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    xi_values: list[float]
    mu_values: list[float]


class SweepCloudRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    grid_step: float = 0.25


class SweepDensityRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)
    densities: list[float]
    strategies: list[Literal["random", "optimized"]] = ["random", "optimized"]


class SweepResponse(BaseModel):
    rows: list[dict[str, Any]]
    metadata: dict[str, Any]


class VisitSharesRequest(BaseModel):
    scenario: ScenarioModel = Field(default_factory=ScenarioModel)


class SolveCoverageRequest(BaseModel):
    visits: list[list[float]]
    horizon: float = 1.0
    budget: int
    xi: float = 0.2
    n_min: int = 3
    method: Literal["greedy", "exact"] = "greedy"


class SolveCoverageResponse(BaseModel):
    respondents: list[int]
    covered_sites: list[int]
    coverage: float
    method: str


class ValidateRequest(BaseModel):
    seed: int = 0
    population: int = 200
    sites: int = 24


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ValidateResponse(BaseModel):
    passed: bool
    checks: list[CheckResult]


class HealthResponse(BaseModel):
    status: str
    service: str
    version: str
