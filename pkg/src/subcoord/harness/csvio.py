"""CSV emission pinned to the checked-in schemas.

Floats print with 12 significant digits; missing values print empty.
Writers refuse rows that do not match the schema, and the header is
always the schema's column list verbatim.
"""

from __future__ import annotations

import os
from importlib import resources


def load_schema(name):
    """Column names from a schema file (first token of each data line)."""
    text = resources.files("subcoord.harness").joinpath(f"schemas/{name}.txt").read_text()
    columns = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        columns.append(line.split()[0])
    return columns


EPISODE_COLUMNS = load_schema("episode_log")
SUMMARY_COLUMNS = load_schema("run_summary")


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def rows_to_csv(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, schema has {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows):
    """Atomic write: temp file then rename, so failures leave no partials."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(rows_to_csv(columns, rows))
    os.replace(tmp, path)


def read_csv(path):
    """Read back a schema CSV: (columns, list of string rows)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    columns = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:] if ln]
    return columns, rows
