"""CSV, JSON and Markdown output for benchmark records."""
import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# solver records: the fixed columns in output order
RECORD_COLUMNS = (
    "solver",
    "m",
    "ell",
    "case",
    "iterations",
    "residual_G",
    "residual_R",
    "time_ms",
    "converged",
    "diagnostics",
)


def format_number(value: Any) -> str:
    """17 significant digits for floats so a CSV cell parses back to the same double."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def _columns(rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]]) -> List[str]:
    if columns is not None:
        return list(columns)
    seen: List[str] = []
    for row in rows:
        for key in row:
            if key not in seen:
                seen.append(key)
    return seen


def write_csv(
    rows: Sequence[Dict[str, Any]], stream: TextIO, columns: Optional[Sequence[str]] = None
) -> None:
    names = _columns(rows, columns)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        writer.writerow([format_number(row.get(name)) for name in names])


def write_json(rows: Sequence[Dict[str, Any]], stream: TextIO) -> None:
    # json emits the shortest repr, which round-trips doubles exactly
    json.dump(list(rows), stream, indent=2, sort_keys=True, allow_nan=True)
    stream.write("\n")


def _md_cell(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".3e")
    if isinstance(value, (dict, list, tuple)):
        return "…" if value else ""
    return "" if value is None else str(value)


def markdown_table(
    rows: Sequence[Dict[str, Any]], columns: Optional[Sequence[str]] = None
) -> str:
    names = [n for n in _columns(rows, columns) if n != "diagnostics"]
    lines = [
        "| " + " | ".join(names) + " |",
        "| " + " | ".join("---" for _ in names) + " |",
    ]
    for row in rows:
        lines.append("| " + " | ".join(_md_cell(row.get(n)) for n in names) + " |")
    return "\n".join(lines) + "\n"


def write_records(
    rows: Sequence[Dict[str, Any]],
    stream: TextIO,
    fmt: str,
    columns: Optional[Sequence[str]] = None,
) -> None:
    """Write rows in one of csv, json or md."""
    if fmt == "csv":
        write_csv(rows, stream, columns)
    elif fmt == "json":
        write_json(rows, stream)
    elif fmt == "md":
        stream.write(markdown_table(rows, columns))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_file(
    rows: Sequence[Dict[str, Any]],
    path: PathLike,
    fmt: Optional[str] = None,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    """Write rows to path; the format defaults to the file suffix."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".") or "json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        write_records(rows, handle, fmt, columns)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
