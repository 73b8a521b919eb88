"""CSV loading with schema validation shared by all figure renderers.

Input files are the solver CLI's artifacts: an optional leading '# ...'
comment line, a header row, then data rows. See SCHEMAS.md for the column
contracts. Renderers fail fast (nonzero exit, no output file) on missing
columns or empty data.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input CSV does not satisfy the figure's column contract."""


def read_columns(path: str | Path, required: list[str]) -> dict[str, np.ndarray]:
    """Read a CSV into named columns, requiring the given ones to exist.

    Numeric columns come back as float arrays ('inf' allowed); non-numeric
    ones as object arrays of strings.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    rows = [r for r in rows if not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing required columns {missing} (have {header})")
    data = rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows")
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        raw = [r[j] if j < len(r) else "" for r in data]
        try:
            cols[name] = np.array([float(x) for x in raw])
        except ValueError:
            cols[name] = np.array(raw, dtype=object)
    return cols
