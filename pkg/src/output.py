"""CSV/JSON writers for run results."""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

VALID_FORMATS = ["csv", "json"]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _to_serializable(value):
    if isinstance(value, dict):
        return {str(k): _to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_serializable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_table(path: str | Path, columns: list[str], rows: list[dict]) -> None:
    """Write rows as CSV with a header; floats get 17 significant digits."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row.get(c)) for c in columns])
    logger.debug(f"Wrote {len(rows)} rows to {path}")


def write_json(path: str | Path, document: dict) -> None:
    with open(path, "w") as f:
        json.dump(_to_serializable(document), f, indent=2, sort_keys=True)
    logger.debug(f"Wrote {path}")


def generated_at() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def write_result(
    output_dir: str,
    name: str,
    columns: list[str],
    rows: list[dict],
    config: dict,
    metadata: dict | None = None,
    fmt: str = "csv",
) -> list[str]:
    """Write one result table and its metadata.

    ``fmt="csv"`` gives ``<name>.csv`` plus a ``<name>.json`` sidecar with
    the config and metadata; ``fmt="json"`` gives a single ``<name>.json``
    with the table embedded.

    Returns:
        Paths written
    """
    if fmt not in VALID_FORMATS:
        raise ValueError(f"Invalid format '{fmt}'. Must be one of: {VALID_FORMATS}")
    out = Path(output_dir)
    sidecar = {
        "config": config,
        "metadata": metadata or {},
        "generated_at": generated_at(),
    }
    if fmt == "json":
        sidecar["columns"] = columns
        sidecar["rows"] = [{c: row.get(c) for c in columns} for row in rows]
        path = out / f"{name}.json"
        write_json(path, sidecar)
        return [str(path)]

    table_path = out / f"{name}.csv"
    write_table(table_path, columns, rows)
    meta_path = out / f"{name}.json"
    write_json(meta_path, sidecar)
    return [str(table_path), str(meta_path)]
