"""Key-value run configuration: flat sections, typed scalars, SI unit suffixes.

The format is deliberately small:

    [physical]
    mass = 7.016003437 u
    omega = 1e5 /s          # angular frequency; plain "Hz" is rejected
    temperature = 200 uK

    [geometry]
    d_max = 4.5             # geometry/numerics blocks are in natural units

Every key has a recorded default, so a minimal config is valid and the
manifest can echo the fully resolved block.  Unknown keys and unit
mismatches are rejected with the offending line number.

The parser is hand-rolled rather than configparser-based because the error
messages need line numbers and the values need unit-aware typing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .units import ATOMIC_MASS, LI7_MASS

COMMANDS = ("eigen", "split", "interfere", "channels", "thermal", "check-adiabatic")


class ConfigError(ValueError):
    """Malformed configuration; message carries the line number when known."""


# unit token -> (dimension, SI factor)
_UNITS = {
    "m": ("length", 1.0), "mm": ("length", 1e-3), "um": ("length", 1e-6),
    "µm": ("length", 1e-6), "nm": ("length", 1e-9),
    "s": ("time", 1.0), "ms": ("time", 1e-3), "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "K": ("temperature", 1.0), "mK": ("temperature", 1e-3),
    "uK": ("temperature", 1e-6), "nK": ("temperature", 1e-9),
    "kg": ("mass", 1.0), "u": ("mass", ATOMIC_MASS), "amu": ("mass", ATOMIC_MASS),
    "/s": ("angular_frequency", 1.0), "1/s": ("angular_frequency", 1.0),
    "rad/s": ("angular_frequency", 1.0),
}

# key -> (dimension or type tag, default); dimensionless keys use "float"/"int"
_SCHEMA = {
    "physical": {
        "mass": ("mass", LI7_MASS),
        "omega": ("angular_frequency", 1e5),
        "temperature": ("temperature", 200e-6),
        "source_length": ("length", 100e-6),
        "delta_l": ("length", 2e-6),
        "device_length": ("length", 1e-3),
        "detection_time": ("time", 20e-3),
    },
    "geometry": {
        "z_split_start": ("float", 45.0),
        "ramp_length": ("float", 70.0),
        "plateau_length": ("float", 40.0),
        "d_max": ("float", 4.5),
        "d": ("float", 10.0),            # well separation for eigen/split
        "omega_arm": ("float", 2.0),
        "ramp": (("linear", "smoothstep"), "smoothstep"),
        "arm_delta_l": ("float", 0.0),
    },
    "numerics": {
        "n_x": ("int", 64),
        "x_half": ("float", 6.4),
        "eigen_n_x": ("int", 1024),        # station-solver grid (eigen/split)
        "eigen_x_half": ("float", 12.0),
        "n_z": ("int", 1024),
        "z_max": ("float", 280.0),
        "dt": ("float", 2.5e-3),
        "k0": ("float", 2.5),
        "sigma_z": ("float", 5.0),
        "z0": ("float", 26.0),
        "z_detect": ("float", 245.0),
        "n_mode": ("int", 0),
        "n_levels": ("int", 8),
        "delta_phi": ("float", 3.141592653589793),
        "k_mean": ("float", 10.0),
        "k_spread": ("float", 0.05),
        "packet_points": ("int", 192),
        "packet_span": ("float", 4.0),
        "n_long_max": ("int", 6000),
        "n_trans_max": ("int", 9),
        "weight_epsilon": ("float", 1e-3),
        "n_pattern": ("int", 1024),
        "pattern_z_max": ("float", 12800.0),
    },
    "output": {
        "directory": ("str", "."),
        "dump_fields": ("bool", False),
    },
}


@dataclass
class RunConfig:
    command: str
    physical: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    defaulted: dict = field(default_factory=dict)   # section -> sorted key list

    def section(self, name: str) -> dict:
        return getattr(self, name.replace("-", "_"))

    def resolved(self) -> dict:
        """Every key of every section, defaults made explicit."""
        return {s: dict(sorted(self.section(s).items())) for s in _SCHEMA}


def _parse_value(raw: str, kind, key: str, line_no: int):
    if isinstance(kind, tuple):        # enum
        if raw not in kind:
            raise ConfigError(
                f"line {line_no}: {key} must be one of {', '.join(kind)}; got {raw!r}")
        return raw
    if kind == "str":
        return raw
    if kind == "bool":
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ConfigError(f"line {line_no}: {key} must be true/false, got {raw!r}")

    parts = raw.split()
    if len(parts) > 2:
        raise ConfigError(f"line {line_no}: cannot parse {key} value {raw!r}")
    try:
        number = float(parts[0])
    except ValueError:
        raise ConfigError(f"line {line_no}: {key} needs a number, got {parts[0]!r}")

    if kind in ("float", "int"):
        if len(parts) == 2:
            raise ConfigError(
                f"line {line_no}: {key} is a natural-unit quantity; drop the "
                f"unit suffix {parts[1]!r}")
        if kind == "int":
            if number != int(number):
                raise ConfigError(f"line {line_no}: {key} must be an integer")
            return int(number)
        return number

    # dimensioned SI quantity
    if len(parts) == 1:
        raise ConfigError(
            f"line {line_no}: {key} needs a unit suffix (dimension: {kind})")
    unit = parts[1]
    if unit == "Hz":
        raise ConfigError(
            f"line {line_no}: {key} is an angular frequency; 'Hz' is ambiguous, "
            f"use '/s' (rad/s)")
    if unit not in _UNITS:
        raise ConfigError(f"line {line_no}: unknown unit {unit!r} for {key}")
    dim, factor = _UNITS[unit]
    if dim != kind:
        raise ConfigError(
            f"line {line_no}: {key} expects a {kind} unit, got {unit!r} ({dim})")
    return number * factor


def parse_config(text: str, command: str) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose from {COMMANDS}")
    cfg = RunConfig(command=command)
    seen: dict = {s: set() for s in _SCHEMA}
    section = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("[") and body.endswith("]"):
            section = body[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(
                    f"line {line_no}: unknown section [{section}]; known: "
                    f"{', '.join(sorted(_SCHEMA))}")
            continue
        if section is None:
            raise ConfigError(f"line {line_no}: key outside any [section]")
        if "=" not in body:
            raise ConfigError(f"line {line_no}: expected 'key = value'")
        key, raw = (p.strip() for p in body.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"line {line_no}: unknown key {key!r} in [{section}]")
        if key in seen[section]:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        seen[section].add(key)
        kind, _ = _SCHEMA[section][key]
        cfg.section(section)[key] = _parse_value(raw, kind, key, line_no)

    for sec, keys in _SCHEMA.items():
        defaulted = []
        for key, (_, default) in keys.items():
            if key not in cfg.section(sec):
                cfg.section(sec)[key] = default
                defaulted.append(key)
        cfg.defaulted[sec] = sorted(defaulted)
    return cfg


def config_text(resolved: dict, command: str) -> str:
    """Render a resolved config block back to parseable text."""
    dims = {k: v[0] for sec in _SCHEMA.values() for k, v in sec.items()}
    unit_of = {"length": "m", "time": "s", "temperature": "K", "mass": "kg",
               "angular_frequency": "/s"}
    lines = [f"# guidewave {command} configuration (fully resolved)"]
    for sec in _SCHEMA:
        lines.append(f"[{sec}]")
        for key, value in sorted(resolved[sec].items()):
            kind = dims[key]
            if isinstance(kind, str) and kind in unit_of:
                lines.append(f"{key} = {value!r} {unit_of[kind]}")
            elif isinstance(value, bool):
                lines.append(f"{key} = {str(value).lower()}")
            elif isinstance(value, float):
                lines.append(f"{key} = {value!r}")
            else:
                lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
