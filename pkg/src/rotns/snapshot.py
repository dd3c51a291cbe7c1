"""Binary snapshot files ("CNSF", version 1).

Layout, little-endian: magic b"CNSF", u32 version, u64 n, f64 box_length,
f64 time, f64 omega, u8 flags (bit 0 = divergence free), then 3 n^3 complex
coefficients as (re, im) f64 pairs in FFT order, components concatenated.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fields import SpectralVectorField
from .grid import GridSpec

MAGIC = b"CNSF"
VERSION = 1
_HEADER = struct.Struct("<4sIQdddB")


@dataclass(frozen=True)
class Snapshot:
    field: SpectralVectorField
    time: float
    omega: float


def encode_snapshot(field: SpectralVectorField, time: float, omega: float) -> bytes:
    grid = field.grid
    flags = 1 if field.divergence_free else 0
    head = _HEADER.pack(MAGIC, VERSION, grid.n, grid.box_length, float(time), float(omega), flags)
    body = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    return head + body


def decode_snapshot(blob: bytes) -> Snapshot:
    if len(blob) < _HEADER.size:
        raise ValueError("snapshot too short")
    magic, version, n, box, time, omega, flags = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    expected = _HEADER.size + 3 * n**3 * 16
    if len(blob) != expected:
        raise ValueError(f"snapshot size {len(blob)} != expected {expected}")
    data = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size).reshape(3, n, n, n)
    field = SpectralVectorField(GridSpec(int(n), box), data.astype(complex), bool(flags & 1))
    return Snapshot(field, time, omega)


def write_snapshot(path: str | Path, field: SpectralVectorField, time: float, omega: float) -> None:
    Path(path).write_bytes(encode_snapshot(field, time, omega))


def read_snapshot(path: str | Path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())
