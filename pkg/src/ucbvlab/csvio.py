"""CSV reading/writing with a replayable config header.

Files are UTF-8 with LF line endings. The first line is an optional
comment '# config: {...}' holding the JSON of the producing config
(keys sorted), then the mandatory header row. Floats are written with
repr() so values round-trip exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    raise TypeError(f"cannot format {type(value).__name__} for CSV")


def write_csv(path, header: list[str], rows, config: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path


def read_csv(path) -> tuple[dict | None, list[str], list[dict[str, str]]]:
    """Returns (config or None, header, rows as per-column string dicts)."""
    config = None
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if first.startswith("#"):
            marker = first.lstrip("#").strip()
            if marker.startswith("config:"):
                config = json.loads(marker[len("config:"):])
            header_line = fh.readline()
        else:
            header_line = first
        reader = csv.reader([header_line] + fh.readlines())
        table = list(reader)
    if not table:
        raise ValueError(f"{path}: empty CSV")
    header = table[0]
    rows = [dict(zip(header, r)) for r in table[1:]]
    return config, header, rows
