"""Tabular result emission: delimited text or JSON lines.

Writers are deterministic: fixed column order, floats at 6 significant
digits, metadata embedded as sorted-key JSON header lines.  Emitting the
same rows twice produces byte-identical files, which downstream tooling
(and the test suite) relies on.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

FORMATS = ("csv", "jsonl")


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _round6(value: Any) -> Any:
    if isinstance(value, float):
        return float(f"{value:.6g}")
    return value


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Sequence[dict[str, Any]],
    metadata: dict[str, Any] | None = None,
    fmt: str = "csv",
) -> None:
    """Write rows (dicts keyed by column name) to ``path`` in the given format."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    path = Path(path)
    meta_json = json.dumps(metadata or {}, sort_keys=True)
    try:
        if fmt == "csv":
            lines = [f"# meta {meta_json}", ",".join(columns)]
            for row in rows:
                lines.append(",".join(format_value(row.get(c)) for c in columns))
            path.write_text("\n".join(lines) + "\n")
        else:
            lines = [json.dumps({"meta": metadata or {}}, sort_keys=True)]
            for row in rows:
                record = {c: _round6(row.get(c)) for c in columns}
                lines.append(json.dumps(record, sort_keys=True))
            path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


RUN_RECORD_COLUMNS = (
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


def emit_results(result, path: str | Path, fmt: str = "csv") -> None:
    """Write one summary row per repetition of a :class:`ScenarioResult`.

    Wall-clock timings are deliberately left out so that reruns with the same
    seed emit byte-identical files.
    """
    rows = [
        {column: getattr(record, column) for column in RUN_RECORD_COLUMNS}
        for record in result.records
    ]
    meta = dict(result.metadata)
    meta["schema"] = "run_records"
    write_table(path, RUN_RECORD_COLUMNS, rows, meta, fmt)


def emit_per_k(result, path: str | Path, fmt: str = "csv") -> None:
    """Long-form per-k precision/recall table across repetitions."""
    rows = []
    for record in result.records:
        for i, (p, r) in enumerate(zip(record.metrics.precision_at_k, record.metrics.recall_at_k)):
            rows.append(
                {"repetition": record.repetition, "k": i + 1, "precision": float(p), "recall": float(r)}
            )
    meta = dict(result.metadata)
    meta["schema"] = "per_k_metrics"
    write_table(path, ("repetition", "k", "precision", "recall"), rows, meta, fmt)


def emit_ranking(result, path: str | Path, fmt: str = "csv") -> None:
    """Per-repetition site ranking: (repetition, rank, site id, score)."""
    rows = []
    for record in result.records:
        for rank, site in enumerate(record.ranking.ranked_ids, start=1):
            rows.append(
                {
                    "repetition": record.repetition,
                    "rank": rank,
                    "site_id": int(site),
                    "score": float(record.ranking.scores[site]),
                }
            )
    meta = dict(result.metadata)
    meta["schema"] = "site_ranking"
    write_table(path, ("repetition", "rank", "site_id", "score"), rows, meta, fmt)


def read_table(path: str | Path) -> tuple[dict[str, Any], list[dict[str, str]]]:
    """Parse a table written by :func:`write_table` (either format).

    CSV cell values come back as strings (empty string for missing); JSONL
    values keep their JSON types.
    """
    path = Path(path)
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError(f"{path}: empty results file")
    if lines[0].startswith("# meta "):
        meta = json.loads(lines[0].removeprefix("# meta "))
        if len(lines) < 2:
            raise ValueError(f"{path}: missing header row")
        columns = lines[1].split(",")
        rows = [dict(zip(columns, ln.split(","))) for ln in lines[2:]]
        return meta, rows
    first = json.loads(lines[0])
    if "meta" not in first:
        raise ValueError(f"{path}: unrecognized results format")
    return first["meta"], [json.loads(ln) for ln in lines[1:]]
