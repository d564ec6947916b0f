"""Scenario configuration documents.

A configuration is a TOML file with up to five sections. Every key is
optional; omitted keys take the defaults listed in SCHEMA, which reproduce
the standard two-box setup. Unknown sections or keys are rejected.

    [physics]   hbar, mass, sigma, kx
    [geometry]  source, splitter, box1, box2          (each [x, y])
    [splitter]  t_amp, r_amp, advanced_attenuation    (amps: number or [re, im])
    [grid]      nx, ny, dx, dy, snapshot_n
    [run]       n_runs, seed, renormalize_outcomes, panel_times
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidConfig


@dataclass(frozen=True)
class Key:
    kind: str
    default: Any
    units: str
    check: Callable[[Any], str | None] | None = None


def _positive(v):
    return None if v > 0 else "must be > 0"


def _pow2(v):
    return None if v >= 16 and v & (v - 1) == 0 else "must be a power of two >= 16"


def _u64(v):
    return None if 0 <= v < 2**64 else "must be in [0, 2^64)"


SCHEMA: dict[str, dict[str, Key]] = {
    "physics": {
        "hbar": Key("float", 1.0, "action", _positive),
        "mass": Key("float", 1.0, "mass", _positive),
        "sigma": Key("float", 50.0, "length (std of |psi|^2 per axis)", _positive),
        "kx": Key("float", 0.4, "1/length (central wavevector magnitude)", _positive),
    },
    "geometry": {
        "source": Key("point", (0.0, 0.0), "length"),
        "splitter": Key("point", (800.0, 0.0), "length"),
        "box1": Key("point", (1600.0, 0.0), "length"),
        "box2": Key("point", (800.0, 800.0), "length"),
    },
    "splitter": {
        "t_amp": Key("complex", 1 / math.sqrt(2), "dimensionless"),
        "r_amp": Key("complex", 1j / math.sqrt(2), "dimensionless"),
        "advanced_attenuation": Key("bool", False, "flag"),
    },
    "grid": {
        "nx": Key("int", 512, "samples", _pow2),
        "ny": Key("int", 512, "samples", _pow2),
        "dx": Key("float", 2.0, "length", _positive),
        "dy": Key("float", 2.0, "length", _positive),
        "snapshot_n": Key("int", 512, "samples", _pow2),
    },
    "run": {
        "n_runs": Key("int", 100000, "runs", _positive),
        "seed": Key("int", None, "integer; omitted means generate one", _u64),
        "renormalize_outcomes": Key("bool", False, "flag"),
        "panel_times": Key("times", None, "time"),
    },
}


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(kind: str, value):
    """Convert a raw TOML value; return (value, error_message)."""
    if kind == "float":
        if not _is_number(value) or not math.isfinite(value):
            return None, f"expected a finite number, got {value!r}"
        return float(value), None
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            return None, f"expected an integer, got {value!r}"
        return value, None
    if kind == "bool":
        if not isinstance(value, bool):
            return None, f"expected true or false, got {value!r}"
        return value, None
    if kind == "point":
        if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(_is_number(v) for v in value)):
            return None, f"expected [x, y], got {value!r}"
        return (float(value[0]), float(value[1])), None
    if kind == "complex":
        if isinstance(value, complex):
            return value, None
        if _is_number(value):
            return complex(value), None
        if isinstance(value, (list, tuple)) and len(value) == 2 and all(_is_number(v) for v in value):
            return complex(value[0], value[1]), None
        return None, f"expected a number or [re, im], got {value!r}"
    if kind == "times":
        if value is None:
            return None, None
        if not (isinstance(value, (list, tuple)) and value and all(_is_number(v) for v in value)):
            return None, f"expected a non-empty list of times, got {value!r}"
        return tuple(float(v) for v in value), None
    raise AssertionError(kind)


def normalize(raw: dict | None) -> dict[str, dict[str, Any]]:
    """Validate a raw nested mapping and fill defaults.

    Collects every problem before raising so the caller sees them all.
    """
    raw = raw or {}
    problems = []
    out = {sec: {k: spec.default for k, spec in keys.items()} for sec, keys in SCHEMA.items()}
    for sec, body in raw.items():
        if sec not in SCHEMA:
            problems.append((sec, f"unknown section; expected one of {sorted(SCHEMA)}"))
            continue
        if not isinstance(body, dict):
            problems.append((sec, "expected a table"))
            continue
        for key, value in body.items():
            where = f"{sec}.{key}"
            spec = SCHEMA[sec].get(key)
            if spec is None:
                problems.append((where, f"unknown key; expected one of {sorted(SCHEMA[sec])}"))
                continue
            v, err = _coerce(spec.kind, value)
            if err is None and spec.check is not None:
                err = spec.check(v)
                if err:
                    err = f"{err}, got {value!r} ({spec.units})"
            if err:
                problems.append((where, err))
            else:
                out[sec][key] = v
    if problems:
        raise InvalidConfig(problems)
    return out


def parse_text(text: str, source: str = "<config>") -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = getattr(exc, "msg", str(exc))
        where = f"{source}:{line}:{col}" if line is not None else source
        raise InvalidConfig([(where, msg)]) from None


def load(path) -> dict:
    """Read and parse a config file. IO errors propagate as OSError."""
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))
