"""Artifact writers for tables, plot data and structured reports."""

import csv
import io
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
import orjson

from .hashutil import hash_bytes
from .logging_setup import get_logger

logger = get_logger("report")

_JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY


def ensure_out_dir(out_dir: str | Path) -> Path:
    """Ensure the output directory exists and return it."""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _default(obj: Any) -> Any:
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, set, frozenset)):
        return list(obj)
    raise TypeError(f"Type is not JSON serializable: {type(obj).__name__}")


def dumps_json(obj: Any) -> bytes:
    """Serialize to deterministic JSON bytes (sorted keys, LF terminated)."""
    return orjson.dumps(obj, default=_default, option=_JSON_OPTIONS) + b"\n"


def dumps_json_line(obj: Any) -> str:
    """Serialize to one compact JSON line."""
    return orjson.dumps(
        obj, default=_default, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    ).decode("utf-8")


def format_metadata(metadata: dict[str, Any]) -> str:
    """Render metadata as the leading '# key=value,...' line of a CSV."""
    return "# " + ",".join(f"{key}={metadata[key]}" for key in sorted(metadata))


def write_text(path: Path, text: str) -> str:
    """Write text to file and return SHA256 hex.

    Args:
        path: File path to write to
        text: Text content to write

    Returns:
        SHA256 hex digest of file bytes
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    content_bytes = text.encode("utf-8")
    path.write_bytes(content_bytes)
    return hash_bytes(content_bytes)


def write_json(path: Path, obj: Any, metadata: Optional[dict[str, Any]] = None) -> str:
    """Write JSON object to file and return SHA256 hex.

    With metadata, the payload is wrapped as {"metadata": ..., "data": ...}.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = obj if metadata is None else {"metadata": metadata, "data": obj}
    content_bytes = dumps_json(payload)
    path.write_bytes(content_bytes)
    logger.debug(f"Wrote {path} ({len(content_bytes)} bytes)")
    return hash_bytes(content_bytes)


def render_csv(
    rows: Sequence[dict[str, Any]],
    fieldnames: Optional[Sequence[str]] = None,
    metadata: Optional[dict[str, Any]] = None,
) -> str:
    """Render rows as CSV text with LF line endings."""
    output = io.StringIO()
    if metadata:
        output.write(format_metadata(metadata) + "\n")

    if fieldnames is None:
        # Use sorted keys for deterministic field order
        fieldnames = sorted(rows[0].keys()) if rows else []

    if fieldnames:
        writer = csv.DictWriter(output, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return output.getvalue()


def write_csv(
    path: Path,
    rows: Sequence[dict[str, Any]],
    fieldnames: Optional[Sequence[str]] = None,
    metadata: Optional[dict[str, Any]] = None,
) -> str:
    """Write CSV rows to file and return SHA256 hex.

    Args:
        path: File path to write to
        rows: List of dictionaries to write as CSV
        fieldnames: Column order; sorted keys of the first row when omitted
        metadata: Optional metadata emitted as a leading comment line

    Returns:
        SHA256 hex digest of file bytes
    """
    return write_text(path, render_csv(rows, fieldnames, metadata))


def write_rows(
    out_dir: Path,
    stem: str,
    rows: Sequence[dict[str, Any]],
    fieldnames: Sequence[str],
    metadata: dict[str, Any],
    fmt: Literal["csv", "json"] = "csv",
) -> Path:
    """Write plot-ready columnar rows as <stem>.csv or <stem>.json."""
    if fmt == "json":
        path = out_dir / f"{stem}.json"
        write_json(path, [{name: row[name] for name in fieldnames} for row in rows], metadata)
    else:
        path = out_dir / f"{stem}.csv"
        write_csv(path, rows, fieldnames, metadata)
    return path
