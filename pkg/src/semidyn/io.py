"""File formats: binary PGM masks, escape cubes, JSON.

PGM: ``P5\\n<cols> <rows>\\n255\\n`` followed by rows*cols bytes, 255 for a
set pixel and 0 otherwise.

Escape cube: raw little-endian int32, C order, shape (words, rows, cols),
values as produced by the escape kernel (0 bounded, s>0 escaped at step s,
s<0 non-finite at step -s). The JSON sidecar holds grid, words, N and R.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np


def pgm_bytes(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=bool)
    rows, cols = bits.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + np.where(bits, 255, 0).astype(np.uint8).tobytes()


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM: {tokens[0]!r}")
    cols, rows, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise ValueError("16-bit PGM not supported")
    pos += 1  # single whitespace after maxval
    pix = np.frombuffer(data, dtype=np.uint8, count=rows * cols, offset=pos)
    return pix.reshape(rows, cols)


def atomic_write(path, payload: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path, bits):
    atomic_write(path, pgm_bytes(bits))


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")


def write_json(path, obj):
    atomic_write(path, json_bytes(obj))


def write_cube(path, cube: np.ndarray, header: dict):
    """Write ``path`` (raw cube) and ``path`` + ``.json`` (sidecar)."""
    cube = np.ascontiguousarray(cube, dtype="<i4")
    head = dict(header)
    head.update({"dtype": "<i4", "shape": list(cube.shape), "order": "C"})
    atomic_write(path, cube.tobytes())
    write_json(str(path) + ".json", head)


def read_cube(path):
    head = json.loads(Path(str(path) + ".json").read_text(encoding="utf-8"))
    raw = np.fromfile(path, dtype=head["dtype"])
    return raw.reshape(head["shape"]), head
