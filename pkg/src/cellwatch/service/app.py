"""FastAPI application exposing the simulation framework over HTTP.

The handler functions are plain callables over the core package; the CLI
invokes them in-process and remote clients go through the JSON endpoints.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, experiment
from ..config import ConfigError
from ..delivery import exact_max_coverage, greedy_max_coverage
from ..mobility import VisitMatrix
from ..satisfaction import CalibrationError
from ..topology import TopologyError
from . import schemas


def handle_simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
    result = experiment.run_scenario(request.scenario.to_config())
    records = [
        schemas.RunRecordModel(
            config_hash=r.config_hash,
            repetition=r.repetition,
            seed=r.seed,
            labels_used=r.labels_used,
            dissatisfied_fraction=r.dissatisfied_fraction,
            sigma=r.sigma,
            coverage=r.coverage,
            fpr=r.fpr,
            tpr=r.tpr,
            auc=r.auc,
            r_at_omega=r.r_at_omega,
            omega=r.omega,
            k=r.k,
            top_k=list(r.top_k),
            calibration_note=r.calibration_note,
        )
        for r in result.records
    ]
    return schemas.SimulateResponse(records=records, metadata=result.metadata)


def handle_sweep_xi_mu(request: schemas.SweepXiMuRequest) -> schemas.SweepResponse:
    rows, meta = experiment.sweep_xi_mu(
        request.scenario.to_config(), request.xi_values, request.mu_values
    )
    return schemas.SweepResponse(rows=rows, metadata=meta)


def handle_sweep_cloud(request: schemas.SweepCloudRequest) -> schemas.SweepResponse:
    rows, meta = experiment.sweep_performance_cloud(
        request.scenario.to_config(), request.grid_step
    )
    return schemas.SweepResponse(rows=rows, metadata=meta)


def handle_sweep_density(request: schemas.SweepDensityRequest) -> schemas.SweepResponse:
    rows, meta = experiment.sweep_gt_density(
        request.scenario.to_config(), request.densities, request.strategies
    )
    return schemas.SweepResponse(rows=rows, metadata=meta)


def handle_visit_shares(request: schemas.VisitSharesRequest) -> schemas.SweepResponse:
    config = request.scenario.to_config()
    rows = experiment.visit_share_curve(config)
    meta = {"config": config.to_dict(), "config_hash": config.digest(), "schema": "visit_shares"}
    return schemas.SweepResponse(rows=rows, metadata=meta)


def handle_solve_coverage(request: schemas.SolveCoverageRequest) -> schemas.SolveCoverageResponse:
    visits = VisitMatrix(t=np.asarray(request.visits, dtype=np.float64), horizon=request.horizon)
    solver = greedy_max_coverage if request.method == "greedy" else exact_max_coverage
    assignment = solver(visits, request.budget, request.xi, request.n_min)
    return schemas.SolveCoverageResponse(
        respondents=list(assignment.respondents),
        covered_sites=sorted(assignment.covered_sites),
        coverage=assignment.coverage,
        method=request.method,
    )


def handle_validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
    checks = experiment.validation_checks(request.seed, request.population, request.sites)
    return schemas.ValidateResponse(
        passed=all(c["passed"] for c in checks),
        checks=[schemas.CheckResult(**c) for c in checks],
    )


def create_app() -> FastAPI:
    app = FastAPI(title="cellwatch", version=__version__)

    def run(handler, request):
        try:
            return handler(request)
        except (ConfigError, TopologyError, CalibrationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", service="cellwatch", version=__version__)

    @app.post("/api/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest) -> schemas.SimulateResponse:
        return run(handle_simulate, request)

    @app.post("/api/sweep/xi-mu", response_model=schemas.SweepResponse)
    def sweep_xi_mu(request: schemas.SweepXiMuRequest) -> schemas.SweepResponse:
        return run(handle_sweep_xi_mu, request)

    @app.post("/api/sweep/cloud", response_model=schemas.SweepResponse)
    def sweep_cloud(request: schemas.SweepCloudRequest) -> schemas.SweepResponse:
        return run(handle_sweep_cloud, request)

    @app.post("/api/sweep/density", response_model=schemas.SweepResponse)
    def sweep_density(request: schemas.SweepDensityRequest) -> schemas.SweepResponse:
        return run(handle_sweep_density, request)

    @app.post("/api/visit-shares", response_model=schemas.SweepResponse)
    def visit_shares(request: schemas.VisitSharesRequest) -> schemas.SweepResponse:
        return run(handle_visit_shares, request)

    @app.post("/api/solve-coverage", response_model=schemas.SolveCoverageResponse)
    def solve_coverage(request: schemas.SolveCoverageRequest) -> schemas.SolveCoverageResponse:
        return run(handle_solve_coverage, request)

    @app.post("/api/validate", response_model=schemas.ValidateResponse)
    def validate(request: schemas.ValidateRequest) -> schemas.ValidateResponse:
        return run(handle_validate, request)

    return app


app = create_app()
