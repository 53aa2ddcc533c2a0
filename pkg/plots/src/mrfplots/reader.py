"""CSV input for the figure pipeline.

The files come from the mrfcrb command line tool: comment lines starting
with '#', then a header row, then one row per run. Cells may be empty
when a column does not apply to the mode that wrote the file.
"""

import csv


class InputError(ValueError):
    """Raised when a CSV is missing, empty, or lacks a needed column."""


def read_rows(paths):
    """Read one or more result CSVs into a single list of row dicts."""
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            data = [ln for ln in f if not ln.startswith("#")]
        parsed = list(csv.DictReader(data))
        if not parsed:
            raise InputError(f"{path}: no data rows")
        rows.extend(parsed)
    return rows


def column(rows, name, where=None):
    """Extract a numeric column, skipping rows with an empty cell.

    `where` optionally filters rows first. Raises InputError naming the
    column if it is absent from the header.
    """
    out = []
    for row in rows:
        if where is not None and not where(row):
            continue
        if name not in row:
            raise InputError(f"missing column: {name}")
        cell = (row[name] or "").strip()
        if cell:
            out.append(float(cell))
        else:
            out.append(None)
    return out


def require_columns(rows, names):
    for name in names:
        if any(name not in row for row in rows):
            raise InputError(f"missing column: {name}")
