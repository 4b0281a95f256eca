"""
Snapshot files: a JSON header followed by raw little-endian float64 blocks.

Layout::

    b"VRMHDSNP"                 8-byte magic
    uint64 (little endian)      header length in bytes
    header                      UTF-8 JSON
    payload                     u, rho, s, B coefficients, in header order
"""
import hashlib
import json
import logging
import os
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from src.domain.entities.state import State
from src.domain.exceptions import SnapshotError
from src.domain.services.derham import DeRhamComplex
from src.domain.value_objects.field import Field, SpaceTag

logger = logging.getLogger(__name__)

MAGIC = b"VRMHDSNP"
FORMAT_VERSION = 1
DTYPE = np.dtype("<f8")
FIELD_ORDER = (("u", SpaceTag.X), ("rho", SpaceTag.V3), ("s", SpaceTag.V3), ("B", SpaceTag.V2))


class SnapshotStore:
    """Repository for State snapshots of one complex."""

    def __init__(self, complex_: DeRhamComplex):
        self.complex = complex_

    def write(self, state: State, path) -> Path:
        """Write atomically (temporary file then rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        blocks = []
        payload = []
        for name, tag in FIELD_ORDER:
            coeffs = np.ascontiguousarray(getattr(state, name).coeffs, dtype=DTYPE)
            blocks.append({"name": name, "space": tag.value, "size": int(coeffs.size)})
            payload.append(coeffs.tobytes())
        data = b"".join(payload)
        header = {
            "version": FORMAT_VERSION,
            "endianness": "little",
            "dtype": "float64",
            "geometry": self.complex.describe(),
            "time": float(state.time),
            "step": int(state.step),
            "time_hex": float(state.time).hex(),
            "blocks": blocks,
            "sha256": hashlib.sha256(data).hexdigest(),
        }
        encoded = json.dumps(header, sort_keys=True).encode("utf-8")
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            with open(tmp, "wb") as handle:
                handle.write(MAGIC)
                handle.write(struct.pack("<Q", len(encoded)))
                handle.write(encoded)
                handle.write(data)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except OSError as e:
            raise SnapshotError(f"Failed to write snapshot {path}: {str(e)}")
        logger.debug("snapshot written", extra={"path": str(path), "step": state.step})
        return path

    def read(self, path) -> State:
        """Read a snapshot and check it against this complex."""
        header, data = read_raw(path)
        expected = self.complex.describe()
        if header["geometry"] != expected:
            raise SnapshotError(
                f"snapshot geometry {header['geometry']} does not match the complex {expected}"
            )
        fields = {}
        offset = 0
        for block, (name, tag) in zip(header["blocks"], FIELD_ORDER):
            if block["name"] != name or block["space"] != tag.value:
                raise SnapshotError(f"unexpected block {block['name']!r} in {path}")
            if block["size"] != self.complex.dimension(tag):
                raise SnapshotError(f"block {name} has {block['size']} coefficients, "
                                    f"expected {self.complex.dimension(tag)}")
            count = block["size"] * DTYPE.itemsize
            fields[name] = Field(tag, np.frombuffer(data[offset:offset + count], dtype=DTYPE).astype(float))
            offset += count
        return State(time=float.fromhex(header["time_hex"]), step=int(header["step"]), **fields)


def read_raw(path):
    """Header dict and payload bytes after the integrity and version checks."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SnapshotError(f"Failed to read snapshot {path}: {str(e)}")
    if len(raw) < len(MAGIC) + 8 or raw[:len(MAGIC)] != MAGIC:
        raise SnapshotError(f"{path} is not a snapshot file")
    (length,) = struct.unpack("<Q", raw[len(MAGIC):len(MAGIC) + 8])
    start = len(MAGIC) + 8
    if len(raw) < start + length:
        raise SnapshotError(f"{path} is truncated (header)")
    try:
        header = json.loads(raw[start:start + length].decode("utf-8"))
    except ValueError as e:
        raise SnapshotError(f"{path} has a corrupt header: {str(e)}")
    if header.get("version") != FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {header.get('version')!r}")
    if header.get("endianness") != "little" or header.get("dtype") != "float64":
        raise SnapshotError("snapshot payload must be little-endian float64")
    data = raw[start + length:]
    expected = sum(block["size"] for block in header["blocks"]) * DTYPE.itemsize
    if len(data) != expected:
        raise SnapshotError(f"{path} is truncated: {len(data)} of {expected} payload bytes")
    if hashlib.sha256(data).hexdigest() != header["sha256"]:
        raise SnapshotError(f"{path} failed its checksum")
    return header, data


def snapshot_geometry(path) -> dict:
    return read_raw(path)[0]["geometry"]


def latest_snapshot(directory) -> Optional[Path]:
    snapshots = sorted(Path(directory).glob("step_*.snap"))
    return snapshots[-1] if snapshots else None
