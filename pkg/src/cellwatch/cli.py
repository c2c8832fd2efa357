"""Command-line client for the simulation service.

Each subcommand builds the same request model the HTTP API accepts and runs
the corresponding handler in-process (or against a remote server via
``--server``), then writes the returned tables to disk.  Given the same seed,
an invocation always produces byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

from .config import ConfigError, apply_overrides, load_scenario, scenario_from_dict
from .mobility import load_visit_matrix
from .results import write_table
from .satisfaction import CalibrationError
from .service import schemas
from .service.app import (
    handle_simulate,
    handle_solve_coverage,
    handle_sweep_cloud,
    handle_sweep_density,
    handle_sweep_xi_mu,
    handle_validate,
    handle_visit_shares,
)
from .topology import TopologyError

RUN_COLUMNS = (
    "config_hash",
    "repetition",
    "seed",
    "labels_used",
    "dissatisfied_fraction",
    "sigma",
    "coverage",
    "fpr",
    "tpr",
    "auc",
    "r_at_omega",
    "omega",
    "k",
)

SWEEP_COLUMNS = {
    "xi_mu": ("xi", "mu", "auc_mean", "auc_std", "repetitions"),
    "cloud": ("fpr", "tpr", "r_at_omega_mean", "r_at_omega_std", "repetitions"),
    "density": (
        "density_label",
        "gt_users_per_site",
        "strategy",
        "budget",
        "r_gt_at_omega",
        "r_c_at_omega",
        "best_fpr",
        "best_tpr",
        "coverage",
    ),
    "visit_shares": ("rank", "mean_share"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellwatch",
        description="Simulate crowdsourced detection of under-performing network sites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario config file (YAML)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="PATH=VALUE",
            help="override any config field, e.g. --set profile.mu=0.15",
        )
        p.add_argument("--server", help="base URL of a running service to call instead")

    p = sub.add_parser("simulate", help="run one scenario end to end")
    scenario_flags(p)
    p.add_argument("--per-k-out", help="also write the per-k precision/recall table")
    p.add_argument("--ranking-out", help="also write the per-repetition site ranking")
    p.add_argument("--shares-out", help="also write the mean visit-share curve")

    p = sub.add_parser("sweep-xi-mu", help="mean full-truth AUC per (xi, mu) cell")
    scenario_flags(p)
    p.add_argument("--xi", required=True, help="comma-separated xi values")
    p.add_argument("--mu", required=True, help="comma-separated mu values")

    p = sub.add_parser("sweep-cloud", help="recall at omega per (FPR, TPR) working point")
    scenario_flags(p)
    p.add_argument("--step", type=float, default=0.25, help="working-point grid step")

    p = sub.add_parser("sweep-density", help="gt-only vs classifier recall across survey densities")
    scenario_flags(p)
    p.add_argument("--densities", required=True, help="comma-separated GT users per site")
    p.add_argument(
        "--strategies", default="random,optimized", help="comma-separated delivery strategies"
    )

    p = sub.add_parser("solve-coverage", help="max-coverage survey assignment for a visit matrix")
    p.add_argument("--visits", required=True, help="visit-matrix file (.csv or .npz)")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--xi", type=float, default=0.2)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--method", choices=("greedy", "exact"), default="greedy")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--server", help="base URL of a running service to call instead")

    p = sub.add_parser("validate", help="run the pipeline invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=200)
    p.add_argument("--sites", type=int, default=24)
    p.add_argument("--server", help="base URL of a running service to call instead")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _scenario_model(args: argparse.Namespace) -> schemas.ScenarioModel:
    config = load_scenario(args.config) if args.config else scenario_from_dict({})
    overrides: dict[str, Any] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects PATH=VALUE, got {item!r}")
        path, value = item.split("=", 1)
        overrides[path.strip()] = value.strip()
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    config = apply_overrides(config, overrides)
    return schemas.ScenarioModel.model_validate(config.to_dict())


def _call(args: argparse.Namespace, endpoint: str, handler, request) -> dict[str, Any]:
    if args.server:
        import httpx

        url = args.server.rstrip("/") + endpoint
        reply = httpx.post(url, json=request.model_dump(), timeout=3600.0)
        reply.raise_for_status()
        return reply.json()
    return handler(request).model_dump()


def _emit(args: argparse.Namespace, columns, rows, metadata) -> None:
    if args.out:
        write_table(args.out, columns, rows, metadata, args.format)
    else:
        from .results import format_value

        print(",".join(columns))
        for row in rows:
            print(",".join(format_value(row.get(c)) for c in columns))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _scenario_model(args)
    payload = _call(args, "/api/simulate", handle_simulate, schemas.SimulateRequest(scenario=scenario))
    meta = dict(payload["metadata"])
    meta["schema"] = "run_records"
    rows = payload["records"]
    _emit(args, RUN_COLUMNS, rows, meta)

    if args.per_k_out or args.ranking_out:
        # Per-k and ranking tables need the full metric vectors, which the
        # summary payload does not carry; recompute locally.
        from .experiment import run_scenario
        from .results import emit_per_k, emit_ranking

        result = run_scenario(scenario.to_config())
        if args.per_k_out:
            emit_per_k(result, args.per_k_out, args.format)
        if args.ranking_out:
            emit_ranking(result, args.ranking_out, args.format)
    if args.shares_out:
        shares = _call(
            args, "/api/visit-shares", handle_visit_shares,
            schemas.VisitSharesRequest(scenario=scenario),
        )
        meta = dict(shares["metadata"])
        meta["schema"] = "visit_shares"
        write_table(args.shares_out, SWEEP_COLUMNS["visit_shares"], shares["rows"], meta, args.format)
    return 0


def cmd_sweep_xi_mu(args: argparse.Namespace) -> int:
    request = schemas.SweepXiMuRequest(
        scenario=_scenario_model(args), xi_values=_floats(args.xi), mu_values=_floats(args.mu)
    )
    payload = _call(args, "/api/sweep/xi-mu", handle_sweep_xi_mu, request)
    meta = dict(payload["metadata"])
    meta["schema"] = "xi_mu_auc"
    _emit(args, SWEEP_COLUMNS["xi_mu"], payload["rows"], meta)
    return 0


def cmd_sweep_cloud(args: argparse.Namespace) -> int:
    request = schemas.SweepCloudRequest(scenario=_scenario_model(args), grid_step=args.step)
    payload = _call(args, "/api/sweep/cloud", handle_sweep_cloud, request)
    meta = dict(payload["metadata"])
    meta["schema"] = "performance_cloud"
    _emit(args, SWEEP_COLUMNS["cloud"], payload["rows"], meta)
    return 0


def cmd_sweep_density(args: argparse.Namespace) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    request = schemas.SweepDensityRequest(
        scenario=_scenario_model(args), densities=_floats(args.densities), strategies=strategies
    )
    payload = _call(args, "/api/sweep/density", handle_sweep_density, request)
    meta = dict(payload["metadata"])
    meta["schema"] = "density_tradeoff"
    _emit(args, SWEEP_COLUMNS["density"], payload["rows"], meta)
    return 0


def cmd_solve_coverage(args: argparse.Namespace) -> int:
    visits = load_visit_matrix(args.visits)
    request = schemas.SolveCoverageRequest(
        visits=visits.t.tolist(),
        horizon=visits.horizon,
        budget=args.budget,
        xi=args.xi,
        n_min=args.n_min,
        method=args.method,
    )
    payload = _call(args, "/api/solve-coverage", handle_solve_coverage, request)
    rows = [
        {
            "respondents": " ".join(str(i) for i in payload["respondents"]),
            "covered_sites": " ".join(str(j) for j in payload["covered_sites"]),
            "coverage": payload["coverage"],
            "method": payload["method"],
            "budget": args.budget,
            "xi": args.xi,
            "n_min": args.n_min,
        }
    ]
    columns = ("method", "budget", "xi", "n_min", "coverage", "respondents", "covered_sites")
    meta = {"schema": "coverage_solution", "source": args.visits}
    _emit(args, columns, rows, meta)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    request = schemas.ValidateRequest(seed=args.seed, population=args.population, sites=args.sites)
    payload = _call(args, "/api/validate", handle_validate, request)
    for check in payload["checks"]:
        status = "ok" if check["passed"] else "FAIL"
        detail = f" ({check['detail']})" if check.get("detail") else ""
        print(f"[{status}] {check['name']}{detail}")
    return 0 if payload["passed"] else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-xi-mu": cmd_sweep_xi_mu,
    "sweep-cloud": cmd_sweep_cloud,
    "sweep-density": cmd_sweep_density,
    "solve-coverage": cmd_solve_coverage,
    "validate": cmd_validate,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, TopologyError, CalibrationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed server response: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
