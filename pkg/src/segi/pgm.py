"""Portable graymap (PGM) reading and writing, 8-bit ASCII (P2) and raw (P5)."""
from __future__ import annotations

import os
import re

import numpy as np

__all__ = ["read_pgm", "write_pgm", "to_uint8", "from_uint8"]

_TOKEN = re.compile(rb"#[^\n\r]*[\n\r]?|(\S+)")


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Quantize a [0, 1] image to 8-bit; 0/1 binary images map to 0/255."""
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(data: np.ndarray, maxval: int = 255) -> np.ndarray:
    return np.asarray(data, dtype=np.float64) / float(maxval)


def _header_tokens(buf: bytes, count: int):
    """Return the first ``count`` header tokens and the offset just past the last one."""
    tokens = []
    pos = 0
    for m in _TOKEN.finditer(buf):
        if m.group(1) is None:
            continue
        tokens.append(m.group(1))
        pos = m.end(1)
        if len(tokens) == count:
            break
    if len(tokens) < count:
        raise ValueError("truncated PGM header")
    return tokens, pos


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a P2 or P5 graymap and return a float image in [0, 1]."""
    with open(path, "rb") as f:
        buf = f.read()
    (magic, w, h, maxval), pos = _header_tokens(buf, 4)
    width, height, maxval = int(w), int(h), int(maxval)
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ValueError(f"bad PGM header in {path}")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        start = pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        raw = np.frombuffer(buf, dtype=dtype, count=n, offset=start)
    elif magic == b"P2":
        values = [int(t) for t in re.sub(rb"#[^\n\r]*", b"", buf[pos:]).split()[:n]]
        if len(values) < n:
            raise ValueError(f"truncated PGM raster in {path}")
        raw = np.array(values, dtype=np.int64)
    else:
        raise ValueError(f"unsupported PGM magic {magic!r} in {path}")
    if raw.max(initial=0) > maxval:
        raise ValueError(f"PGM sample exceeds maxval in {path}")
    return from_uint8(raw.reshape(height, width), maxval)


def write_pgm(path: str | os.PathLike, img: np.ndarray, *, ascii: bool = False) -> None:
    """Write ``img`` (values in [0, 1]) as an 8-bit graymap."""
    data = to_uint8(np.asarray(img, dtype=np.float64))
    if data.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    height, width = data.shape
    with open(path, "wb") as f:
        if ascii:
            f.write(f"P2\n{width} {height}\n255\n".encode("ascii"))
            for row in data:
                f.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
        else:
            f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            f.write(data.tobytes())
