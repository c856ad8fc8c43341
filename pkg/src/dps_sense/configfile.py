"""Flat key-value configuration files with unit-suffixed values.

Format: one `key = value` pair per line, `#` comments, values carrying an
optional unit suffix ("h_u = 0.6mm", "f_exc = 114MHz", "L = 1.5nH").
Chosen over nested formats so fixture diffs stay line-per-quantity.
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .geometry import GeometrySpec, csr_turn_lengths_from_outline

__all__ = [
    "parse_value",
    "parse_config_file",
    "load_geometry",
    "bundled_data_path",
]

# Multipliers to SI for each recognized suffix.  Bare numbers are
# dimensionless (or already SI).
_UNIT_FACTORS = {
    "": 1.0,
    # length
    "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9,
    # area
    "m2": 1.0, "cm2": 1e-4, "mm2": 1e-6,
    # frequency
    "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9,
    # inductance
    "h": 1.0, "mh": 1e-3, "uh": 1e-6, "nh": 1e-9, "ph": 1e-12,
    # capacitance
    "f": 1.0, "mf": 1e-3, "uf": 1e-6, "nf": 1e-9, "pf": 1e-12, "ff": 1e-15,
    # time
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12,
    # misc
    "ohm": 1.0, "v": 1.0, "db": 1.0, "deg": 1.0, "pct": 1.0, "%": 1.0,
}

_VALUE_RE = re.compile(r"^([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([a-zA-Zµ%0-9]*)$")


def parse_value(text: str, field: str = "value") -> float:
    """Parse a number with optional unit suffix into SI units."""
    m = _VALUE_RE.match(text.strip())
    if not m:
        raise ConfigError(f"field {field!r}: cannot parse value {text!r}")
    number, unit = m.group(1), m.group(2)
    factor = _UNIT_FACTORS.get(unit.lower())
    if factor is None:
        raise ConfigError(f"field {field!r}: unknown unit suffix {unit!r} in {text!r}")
    return float(number) * factor


def parse_config_file(path) -> dict:
    """Read a flat config file into an ordered {key: raw-string} dict."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    entries: dict[str, str] = {}
    for lineno, line in enumerate(p.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{p}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"{p}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{p}:{lineno}: duplicate key {key!r}")
        entries[key] = raw.strip()
    return entries


_GEOMETRY_KEYS = {
    "eps_r", "tan_delta", "h_u", "h_d", "t_m", "a", "b_len", "A_d",
    "csr_length", "csr_width", "csr_slot_width", "csr_gap", "csr_turns",
    "l_i", "W_i", "N_fingers", "h_m",
}


def geometry_from_entries(entries: dict, source: str = "<config>") -> GeometrySpec:
    """Build a GeometrySpec from parsed config entries."""
    missing = sorted(_GEOMETRY_KEYS - {"tan_delta"} - set(entries))
    if missing:
        raise ConfigError(f"{source}: missing geometry keys: {', '.join(missing)}")

    def num(key: str) -> float:
        return parse_value(entries[key], field=key)

    turns = int(num("csr_turns"))
    turn_lengths = csr_turn_lengths_from_outline(
        length=num("csr_length"),
        width=num("csr_width"),
        slot_width=num("csr_slot_width"),
        gap=num("csr_gap"),
        turns=turns,
    )
    return GeometrySpec(
        substrate_eps_r=num("eps_r"),
        h_u=num("h_u"),
        h_d=num("h_d"),
        t_m=num("t_m"),
        a=num("a"),
        b_len=num("b_len"),
        area_d=num("A_d"),
        csr_turn_lengths=turn_lengths,
        s_c=num("csr_gap"),
        l_i=num("l_i"),
        w_i=num("W_i"),
        n_fingers=int(num("N_fingers")),
        h_m=num("h_m"),
        tan_delta=num("tan_delta") if "tan_delta" in entries else 0.0,
    )


def load_geometry(path) -> GeometrySpec:
    """Load a GeometrySpec from a flat config file."""
    return geometry_from_entries(parse_config_file(path), source=str(path))


def bundled_data_path(name: str) -> Path:
    """Path of a data file shipped with the package (e.g. 'table1.cfg')."""
    return Path(resources.files("dps_sense").joinpath("data", name))
