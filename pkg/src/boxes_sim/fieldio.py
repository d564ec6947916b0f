"""Grid field files and 8-bit heatmaps.

A ``.grid`` file is an ASCII header followed by the payload:

    BOXES_SIM_FIELD 1
    nx <int>
    ny <int>
    dx <float>
    dy <float>
    origin_x <float>
    origin_y <float>
    time <float>
    quantity <psi_density|transition_density>
    END

then nx*ny little-endian float64 values, x-major (value (i, j) at offset
i*ny + j). Floats in the header use repr() so a round trip is bit-exact.

The ``.pgm`` companion is a binary P5 image, nx wide and ny tall with +y up,
scaled so the largest value maps to 255.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import ComplexField, GridSpec

MAGIC = "BOXES_SIM_FIELD 1"
QUANTITIES = ("psi_density", "transition_density")
_FIELDS = ("nx", "ny", "dx", "dy", "origin_x", "origin_y", "time", "quantity")


class FieldFileError(ValueError):
    pass


def encode_field(field: ComplexField, quantity: str) -> bytes:
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    values = np.ascontiguousarray(field.values.real, dtype="<f8")
    if np.any(values < 0):
        raise ValueError("field file payload must be non-negative")
    s = field.spec
    header = [
        MAGIC,
        f"nx {s.nx}",
        f"ny {s.ny}",
        f"dx {s.dx!r}",
        f"dy {s.dy!r}",
        f"origin_x {s.origin[0]!r}",
        f"origin_y {s.origin[1]!r}",
        f"time {float(field.t)!r}",
        f"quantity {quantity}",
        "END",
    ]
    return ("\n".join(header) + "\n").encode("ascii") + values.tobytes()


def decode_field(data: bytes) -> tuple[ComplexField, str]:
    head, sep, payload = data.partition(b"END\n")
    if not sep:
        raise FieldFileError("missing END line in header")
    lines = head.decode("ascii").splitlines()
    if not lines or lines[0] != MAGIC:
        raise FieldFileError(f"bad magic line: {lines[:1]}")
    meta = dict(line.split(" ", 1) for line in lines[1:])
    if tuple(meta) != _FIELDS:
        raise FieldFileError(f"header keys {tuple(meta)} != {_FIELDS}")
    nx, ny = int(meta["nx"]), int(meta["ny"])
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != nx * ny:
        raise FieldFileError(f"payload has {values.size} values, header says {nx}x{ny}")
    spec = GridSpec(nx, ny, float(meta["dx"]), float(meta["dy"]), (float(meta["origin_x"]), float(meta["origin_y"])))
    return ComplexField(spec, values.reshape(nx, ny), float(meta["time"])), meta["quantity"]


def heatmap_bytes(values: np.ndarray) -> bytes:
    v = np.asarray(values.real, dtype=float)
    top = v.max()
    if top > 0:
        img = np.rint(255.0 * v / top).astype(np.uint8)
    else:
        img = np.zeros(v.shape, dtype=np.uint8)
    # rows run from high y to low y
    img = img.T[::-1, :]
    ny, nx = img.shape
    return f"P5\n{nx} {ny}\n255\n".encode("ascii") + img.tobytes()


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise FieldFileError("not a binary PGM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def write_field(path, field: ComplexField, quantity: str) -> Path:
    path = Path(path)
    path.write_bytes(encode_field(field, quantity))
    return path


def read_field(path) -> tuple[ComplexField, str]:
    return decode_field(Path(path).read_bytes())


def write_heatmap(path, field: ComplexField) -> Path:
    path = Path(path)
    path.write_bytes(heatmap_bytes(field.values))
    return path


def time_label(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t)).replace(".", "p")
