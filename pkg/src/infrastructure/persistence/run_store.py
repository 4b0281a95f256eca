"""
Run directory layout: diagnostics, manifest, snapshots and case outputs.
"""
import csv
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from src.domain.entities.diagnostics_record import CSV_COLUMNS, DiagnosticsRecord
from src.domain.exceptions import SnapshotError

logger = logging.getLogger(__name__)

DIAGNOSTICS_FILE = "diagnostics.csv"
MANIFEST_FILE = "manifest.json"
SNAPSHOT_DIR = "snapshots"


def fmt(value) -> str:
    """17 significant digits, enough to round-trip a float64."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".17g")


class RunStore:
    """Files of one run directory."""

    def __init__(self, root):
        self.root = Path(root)

    def prepare(self):
        (self.root / SNAPSHOT_DIR).mkdir(parents=True, exist_ok=True)
        return self

    @property
    def diagnostics_path(self) -> Path:
        return self.root / DIAGNOSTICS_FILE

    def snapshot_path(self, step: int) -> Path:
        return self.root / SNAPSHOT_DIR / f"step_{step:06d}.snap"

    # ------------------------------------------------------------ diagnostics

    def start_diagnostics(self, keep_until_step: Optional[int] = None):
        """Create diagnostics.csv, or truncate it after `keep_until_step` for a restart."""
        kept: List[List[str]] = []
        if keep_until_step is not None and self.diagnostics_path.exists():
            kept = [row for row in self.read_diagnostics_rows() if int(row[0]) <= keep_until_step]
        with open(self.diagnostics_path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            writer.writerows(kept)

    def append_diagnostics(self, record: DiagnosticsRecord):
        with open(self.diagnostics_path, "a", newline="") as handle:
            csv.writer(handle).writerow([fmt(v) for v in record.row().values()])

    def read_diagnostics_rows(self) -> List[List[str]]:
        with open(self.diagnostics_path, newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows or tuple(rows[0]) != CSV_COLUMNS:
            raise SnapshotError(f"{self.diagnostics_path} has an unexpected header")
        return rows[1:]

    def read_diagnostics(self) -> np.ndarray:
        """Diagnostics as a float array with CSV_COLUMNS columns."""
        rows = self.read_diagnostics_rows()
        return np.array([[float(v) for v in row] for row in rows]).reshape(len(rows), len(CSV_COLUMNS))

    # -------------------------------------------------------------- manifest

    def write_manifest(self, manifest: dict):
        with open(self.root / MANIFEST_FILE, "w") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True, default=str)

    def read_manifest(self) -> dict:
        path = self.root / MANIFEST_FILE
        if not path.exists():
            raise SnapshotError(f"no manifest in {self.root}")
        with open(path) as handle:
            return json.load(handle)

    # ------------------------------------------------------------ tabular out

    def write_rows(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = self.root / name
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(v) for v in row])
        return path

    def read_rows(self, name: str):
        """(header, float array) of a CSV written by write_rows."""
        with open(self.root / name, newline="") as handle:
            rows = list(csv.reader(handle))
        if not rows:
            raise SnapshotError(f"{name} is empty")
        return rows[0], np.array([[float(v) for v in row] for row in rows[1:]])

    def write_matrix(self, name: str, row_axis: Sequence[float], column_axis: Sequence[float],
                     values: np.ndarray, corner: str = "omega\\k") -> Path:
        """Matrix CSV: the header row holds the column axis, the first column the row axis."""
        values = np.asarray(values)
        header = [corner] + [fmt(v) for v in column_axis]
        return self.write_rows(name, header,
                               ([r] + list(values[i]) for i, r in enumerate(row_axis)))

    def append_trace(self, name: str, time: float, x: Sequence[float], values: Sequence[float]):
        """Space-time trace: header 'time, x_0, ...', one row per sample time."""
        path = self.root / name
        new = not path.exists()
        with open(path, "a", newline="") as handle:
            writer = csv.writer(handle)
            if new:
                writer.writerow(["time"] + [fmt(v) for v in x])
            writer.writerow([fmt(time)] + [fmt(v) for v in values])

    def read_trace(self, name: str):
        """(x, times, history[time, x]) of a trace file."""
        header, data = self.read_rows(name)
        x = np.array([float(v) for v in header[1:]])
        return x, data[:, 0], data[:, 1:]

    def truncate_trace(self, name: str, until_time: float):
        path = self.root / name
        if not path.exists():
            return
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        kept = [rows[0]] + [row for row in rows[1:] if float(row[0]) <= until_time]
        with open(path, "w", newline="") as handle:
            csv.writer(handle).writerows(kept)
