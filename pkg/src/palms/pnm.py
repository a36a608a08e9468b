"""Minimal binary PGM/PBM writers and readers.

Just enough of the netpbm formats for kernel and heatmap exports: 16-bit
``P5`` graymaps (big-endian samples) and packed ``P4`` bitmaps.  Arrays are
written row 0 first; callers decide which world edge that is.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .exceptions import FormatError


def write_pgm16(path: str | Path, values: np.ndarray) -> None:
    """Write a uint16 array as a binary 16-bit PGM."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.dtype != np.uint16:
        raise ValueError("write_pgm16 wants a 2-d uint16 array")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n65535\n".encode("ascii")
    Path(path).write_bytes(header + arr.astype(">u2").tobytes())


def write_pbm(path: str | Path, bits: np.ndarray) -> None:
    """Write a boolean array as a binary PBM (True = black)."""
    arr = np.asarray(bits).astype(bool)
    if arr.ndim != 2:
        raise ValueError("write_pbm wants a 2-d array")
    h, w = arr.shape
    header = f"P4\n{w} {h}\n".encode("ascii")
    packed = np.packbits(arr, axis=1)
    Path(path).write_bytes(header + packed.tobytes())


def _read_header(data: bytes, magic: bytes, n_fields: int) -> tuple[list[int], int]:
    if not data.startswith(magic):
        raise FormatError(f"expected {magic.decode()} header")
    fields: list[int] = []
    pos = 2
    while len(fields) < n_fields:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        try:
            fields.append(int(data[start:pos]))
        except ValueError as e:
            raise FormatError(f"bad header field: {e}") from e
    return fields, pos + 1  # single whitespace byte after the last field


def read_pgm16(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    (w, h, maxval), pos = _read_header(data, b"P5", 3)
    if maxval != 65535:
        raise FormatError(f"expected 16-bit PGM, got maxval {maxval}")
    raw = np.frombuffer(data, dtype=">u2", count=w * h, offset=pos)
    return raw.reshape(h, w).astype(np.uint16)


def read_pbm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    (w, h), pos = _read_header(data, b"P4", 2)
    row_bytes = (w + 7) // 8
    raw = np.frombuffer(data, dtype=np.uint8, count=h * row_bytes, offset=pos)
    bits = np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w]
    return bits.astype(bool)
