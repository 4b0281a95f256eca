"""
Tests for snapshot files and run directories.
"""
import json
import struct
from dataclasses import replace

import numpy as np
import pytest

from src.domain.entities.diagnostics_record import CSV_COLUMNS, DiagnosticsRecord
from src.domain.exceptions import SnapshotError
from src.domain.services.derham import build_complex
from src.domain.value_objects.spline_space import Boundary
from src.infrastructure.persistence import snapshot_store
from src.infrastructure.persistence.run_store import RunStore, fmt
from src.infrastructure.persistence.snapshot_store import SnapshotStore, latest_snapshot


@pytest.fixture
def snapshot(tmp_path, complex_2d, state_2d):
    state = replace(state_2d, time=0.1 + 0.2, step=30)
    path = SnapshotStore(complex_2d).write(state, tmp_path / "snapshots" / "step_000030.snap")
    return path, state


class TestSnapshotStore:
    """Test binary snapshots."""

    def test_round_trip_is_bit_identical(self, snapshot, complex_2d):
        """Test every coefficient, the time and the step survive exactly."""
        path, state = snapshot
        loaded = SnapshotStore(complex_2d).read(path)
        for name in ("u", "rho", "s", "B"):
            original, restored = getattr(state, name), getattr(loaded, name)
            assert restored.space_tag is original.space_tag
            assert restored.coeffs.tobytes() == original.coeffs.tobytes()
        assert loaded.time == state.time
        assert loaded.step == 30

    def test_no_temporary_file_left(self, snapshot):
        """Test the atomic write removes its temporary file."""
        path, _ = snapshot
        assert [p.name for p in path.parent.iterdir()] == [path.name]

    def test_header_records_geometry(self, snapshot, complex_2d):
        """Test the header carries the complex description."""
        path, _ = snapshot
        assert snapshot_store.snapshot_geometry(path) == complex_2d.describe()

    def test_truncated_payload(self, snapshot, complex_2d):
        """Test a cut file raises SnapshotError."""
        path, _ = snapshot
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SnapshotError, match="truncated"):
            SnapshotStore(complex_2d).read(path)

    def test_corrupted_payload(self, snapshot, complex_2d):
        """Test a flipped payload byte fails the checksum."""
        path, _ = snapshot
        raw = bytearray(path.read_bytes())
        raw[-3] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(SnapshotError, match="checksum"):
            SnapshotStore(complex_2d).read(path)

    def test_not_a_snapshot(self, tmp_path, complex_2d):
        """Test a file without the magic bytes is rejected."""
        path = tmp_path / "notes.snap"
        path.write_bytes(b"hello world, not a snapshot")
        with pytest.raises(SnapshotError):
            SnapshotStore(complex_2d).read(path)

    def test_unsupported_version(self, snapshot, complex_2d):
        """Test a header from another format version is rejected."""
        path, _ = snapshot
        raw = path.read_bytes()
        start = len(snapshot_store.MAGIC) + 8
        (length,) = struct.unpack("<Q", raw[len(snapshot_store.MAGIC):start])
        header = json.loads(raw[start:start + length])
        header["version"] = 99
        encoded = json.dumps(header).encode("utf-8")
        path.write_bytes(snapshot_store.MAGIC + struct.pack("<Q", len(encoded)) + encoded
                         + raw[start + length:])
        with pytest.raises(SnapshotError, match="version"):
            SnapshotStore(complex_2d).read(path)

    def test_other_geometry_rejected(self, snapshot):
        """Test loading into a complex with other cells raises."""
        path, _ = snapshot
        other = build_complex((2, 2), (8, 8), (Boundary.PERIODIC,) * 2, ((0.0, 2.0 * np.pi),) * 2)
        with pytest.raises(SnapshotError, match="geometry"):
            SnapshotStore(other).read(path)

    def test_missing_file(self, tmp_path, complex_2d):
        """Test a missing path raises SnapshotError."""
        with pytest.raises(SnapshotError):
            SnapshotStore(complex_2d).read(tmp_path / "absent.snap")

    def test_latest_snapshot(self, tmp_path, complex_2d, state_2d):
        """Test the highest step is found, or None in an empty directory."""
        assert latest_snapshot(tmp_path) is None
        store = SnapshotStore(complex_2d)
        for step in (5, 10, 15):
            store.write(state_2d, tmp_path / f"step_{step:06d}.snap")
        assert latest_snapshot(tmp_path).name == "step_000015.snap"


def make_record(step: int, time: float) -> DiagnosticsRecord:
    return DiagnosticsRecord(time=time, mass=1.0 / 3.0, entropy=-0.25, e_kin=0.1, e_int=2.0,
                             e_mag=0.3, divB_l2=1e-17, step=step)


class TestRunStore:
    """Test run directory files."""

    @pytest.mark.parametrize("value,expected", [
        (3, "3"),
        (np.int64(12), "12"),
        (0.1, "0.10000000000000001"),
        (1.0, "1"),
        (1.0 / 3.0, "0.33333333333333331"),
    ])
    def test_fmt(self, value, expected):
        """Test integers stay integers and floats get 17 significant digits."""
        assert fmt(value) == expected

    def test_diagnostics_round_trip(self, tmp_path):
        """Test appended records read back exactly."""
        store = RunStore(tmp_path).prepare()
        store.start_diagnostics()
        for step in range(3):
            store.append_diagnostics(make_record(step, 0.1 * step))
        data = store.read_diagnostics()
        assert data.shape == (3, len(CSV_COLUMNS))
        assert data[:, 0].tolist() == [0.0, 1.0, 2.0]
        assert data[2, 1] == 0.1 * 2
        assert data[0, CSV_COLUMNS.index("mass")] == 1.0 / 3.0
        assert data[0, CSV_COLUMNS.index("e_total")] == pytest.approx(2.4)

    def test_restart_truncates_later_rows(self, tmp_path):
        """Test rows after the restart step are dropped."""
        store = RunStore(tmp_path).prepare()
        store.start_diagnostics()
        for step in range(8):
            store.append_diagnostics(make_record(step, 0.1 * step))
        store.start_diagnostics(keep_until_step=5)
        assert [int(row[0]) for row in store.read_diagnostics_rows()] == [0, 1, 2, 3, 4, 5]

    def test_unexpected_header(self, tmp_path):
        """Test a foreign CSV raises SnapshotError."""
        store = RunStore(tmp_path)
        store.diagnostics_path.write_text("a,b\n1,2\n")
        with pytest.raises(SnapshotError):
            store.read_diagnostics()

    def test_manifest(self, tmp_path):
        """Test the manifest round trip and the missing-manifest error."""
        store = RunStore(tmp_path)
        with pytest.raises(SnapshotError):
            store.read_manifest()
        store.write_manifest({"case": "OrszagTangIdeal", "cells": [8, 8]})
        assert store.read_manifest() == {"case": "OrszagTangIdeal", "cells": [8, 8]}

    def test_trace_append_and_truncate(self, tmp_path):
        """Test a space-time trace grows by rows and truncates by time."""
        store = RunStore(tmp_path)
        x = [0.0, 0.5, 1.0]
        for i in range(4):
            store.append_trace("trace_ux.csv", 0.25 * i, x, [i, 2 * i, 3 * i])
        xs, times, history = store.read_trace("trace_ux.csv")
        assert xs.tolist() == x
        assert times.tolist() == [0.0, 0.25, 0.5, 0.75]
        assert history[3].tolist() == [3.0, 6.0, 9.0]
        store.truncate_trace("trace_ux.csv", 0.5)
        assert store.read_trace("trace_ux.csv")[1].tolist() == [0.0, 0.25, 0.5]

    def test_matrix_layout(self, tmp_path):
        """Test the header holds the column axis and rows start with the row axis."""
        store = RunStore(tmp_path)
        store.write_matrix("spectrum.csv", [-1.0, 1.0], [0.0, 2.0, 4.0], np.arange(6.0).reshape(2, 3))
        header, data = store.read_rows("spectrum.csv")
        assert header == ["omega\\k", "0", "2", "4"]
        assert data[:, 0].tolist() == [-1.0, 1.0]
        assert data[1, 1:].tolist() == [3.0, 4.0, 5.0]


class TestStreamlines:
    """Test the streamline figure."""

    def test_png_written(self, tmp_path, complex_2d, state_2d):
        """Test a 2D state is rendered to a PNG file."""
        from src.domain.services.diagnostics import Diagnostics
        from src.domain.value_objects.eos import Eos
        from src.infrastructure.plotting.streamlines import plot_streamlines

        path = plot_streamlines(Diagnostics(complex_2d, Eos(5.0 / 3.0)), state_2d, tmp_path / "s.png")
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_needs_two_dimensions(self, tmp_path, complex_1d, state_1d):
        """Test a 1D state is refused."""
        from src.domain.exceptions import ConfigurationError
        from src.domain.services.diagnostics import Diagnostics
        from src.domain.value_objects.eos import Eos
        from src.infrastructure.plotting.streamlines import plot_streamlines

        with pytest.raises(ConfigurationError):
            plot_streamlines(Diagnostics(complex_1d, Eos(5.0 / 3.0)), state_1d, tmp_path / "s.png")
