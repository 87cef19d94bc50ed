"""Reader for experiment CSVs with an optional config header comment.

Mirrors the producing format: UTF-8, LF, first line optionally
'# config: {...}' with the run parameters as JSON, then the header row
and the data rows. Kept dependency-free of the simulation package so
the CSV files are the whole interface.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path


def read_experiment_csv(path) -> tuple[dict | None, list[str], list[dict[str, str]]]:
    """Returns (config or None, header, rows as per-column string dicts)."""
    path = Path(path)
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
    if not table or table == [[]]:
        raise ValueError(f"{path}: empty CSV")
    header = table[0]
    rows = [dict(zip(header, r)) for r in table[1:]]
    return config, header, rows
