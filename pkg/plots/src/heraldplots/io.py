"""Checksum-verified readers for heraldgate CSV sweep tables.

Each table written by the heraldgate CLI carries a two-line comment block
(`# heraldgate <command> v<version>` and `# run <id>`) and sits next to a
JSON manifest recording the sha256 of the file.  A table is only accepted
here when the checksum and the run id both match; anything else is treated
as a corrupted or foreign file.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field


class DataError(Exception):
    """Base class for unusable input data (exit code 3 in the CLI)."""


class ManifestMismatchError(DataError):
    """Missing manifest, checksum mismatch, or run-id mismatch."""


class ColumnError(DataError):
    """The table lacks a column the figure recipe needs."""


class EmptyDataError(DataError):
    """The table parsed but contains no data rows."""


# columns that stay strings; everything else is coerced to float
_TEXT_COLUMNS = {"source"}


@dataclass(frozen=True)
class SweepTable:
    """One parsed and verified CSV table plus its manifest metadata."""

    path: str
    command: str
    run_id: str
    columns: tuple[str, ...]
    rows: tuple[dict, ...] = field(repr=False)
    options: dict = field(repr=False)

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise ColumnError(f"{self.path}: no column {name!r}")
        return [r[name] for r in self.rows]

    def select(self, **conditions) -> list[dict]:
        """Rows whose values match every keyword exactly."""
        for name in conditions:
            if name not in self.columns:
                raise ColumnError(f"{self.path}: no column {name!r}")
        return [r for r in self.rows
                if all(r[k] == v for k, v in conditions.items())]


def _manifest_path(csv_path: str) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + "_manifest.json"


def load_table(csv_path: str, required: tuple[str, ...] = ()) -> SweepTable:
    """Parse one CLI-produced CSV, verifying it against its manifest.

    required names columns that must be present; the check runs before any
    row parsing so recipe mismatches fail fast and with the column name.
    """
    if not os.path.isfile(csv_path):
        raise DataError(f"no such table: {csv_path}")
    mpath = _manifest_path(csv_path)
    if not os.path.isfile(mpath):
        raise ManifestMismatchError(f"{csv_path}: manifest {mpath} not found")
    with open(mpath, encoding="utf-8") as fh:
        manifest = json.load(fh)
    with open(csv_path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    recorded = manifest.get("outputs", {}).get(os.path.basename(csv_path))
    if recorded != digest:
        raise ManifestMismatchError(
            f"{csv_path}: sha256 {digest[:12]}... does not match manifest "
            f"record {str(recorded)[:12]}...")

    lines = raw.decode("utf-8").splitlines()
    comments = [ln[1:].strip() for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    command = comments[0].split()[1] if comments else ""
    run_id = ""
    for c in comments:
        if c.startswith("run "):
            run_id = c.split()[1]
    if run_id != manifest.get("run_id"):
        raise ManifestMismatchError(
            f"{csv_path}: run id {run_id[:12]}... does not match manifest")

    if not body:
        raise EmptyDataError(f"{csv_path}: no header row")
    columns = tuple(body[0].split(","))
    missing = [c for c in required if c not in columns]
    if missing:
        raise ColumnError(f"{csv_path}: missing columns {missing}")

    rows = []
    for ln in body[1:]:
        cells = ln.split(",")
        if len(cells) != len(columns):
            raise DataError(f"{csv_path}: ragged row {ln!r}")
        row = {}
        for name, cell in zip(columns, cells):
            row[name] = cell if name in _TEXT_COLUMNS else float(cell)
        rows.append(row)
    if not rows:
        raise EmptyDataError(f"{csv_path}: table has no data rows")

    return SweepTable(path=csv_path, command=command, run_id=run_id,
                      columns=columns, rows=tuple(rows),
                      options=manifest.get("options", {}))
